#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hamcycle/random.hpp"

namespace hamcycle {

using NodeId = std::uint32_t;

/// ceil(log2 n) for n >= 1; 0 for n <= 1.
constexpr unsigned ceil_log2(std::uint64_t n) noexcept {
  return n <= 1 ? 0u : static_cast<unsigned>(std::bit_width(n - 1));
}

/// The budget unit used for every "log n" in the schedule and the caps.
constexpr unsigned log_budget(std::uint64_t n) noexcept {
  return std::max(1u, ceil_log2(n));
}

/// Immutable undirected simple graph on nodes 0..n-1 in CSR form.
class Graph {
 public:
  // Above this size has_edge() falls back to binary search instead of a bit matrix.
  static constexpr std::size_t kMatrixLimit = 1u << 14;

  Graph() = default;

  /// Builds from an edge list; duplicates collapse, self loops and
  /// out-of-range endpoints are rejected.
  static Graph from_edges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges) {
    std::vector<std::size_t> degree(n, 0);
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw std::invalid_argument("Graph: edge endpoint out of range");
      if (u == v) throw std::invalid_argument("Graph: self loop");
      ++degree[u];
      ++degree[v];
    }
    Graph g;
    g.n_ = n;
    g.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
    g.adj_.resize(g.offsets_[n]);
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : edges) {
      g.adj_[fill[u]++] = v;
      g.adj_[fill[v]++] = u;
    }
    // Sort and dedupe each row, then compact.
    std::vector<std::size_t> new_offsets(n + 1, 0);
    std::size_t out = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto first = g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
      auto last = g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
      std::sort(first, last);
      last = std::unique(first, last);
      new_offsets[i] = out;
      for (auto it = first; it != last; ++it) g.adj_[out++] = *it;
    }
    new_offsets[n] = out;
    g.adj_.resize(out);
    g.adj_.shrink_to_fit();
    g.offsets_ = std::move(new_offsets);
    g.build_matrix();
    return g;
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return adj_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId u) const noexcept {
    return {adj_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }
  std::size_t degree(NodeId u) const noexcept { return offsets_[u + 1] - offsets_[u]; }

  bool has_edge(NodeId u, NodeId v) const noexcept {
    if (u >= n_ || v >= n_) return false;
    if (!matrix_.empty()) {
      std::size_t bit = static_cast<std::size_t>(u) * n_ + v;
      return (matrix_[bit >> 6] >> (bit & 63)) & 1u;
    }
    auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
  }

  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < n_; ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.offsets_ == b.offsets_ && a.adj_ == b.adj_;
  }

 private:
  void build_matrix() {
    matrix_.clear();
    if (n_ == 0 || n_ > kMatrixLimit) return;
    matrix_.assign((n_ * n_ + 63) / 64, 0);
    for (NodeId u = 0; u < n_; ++u)
      for (NodeId v : neighbors(u)) {
        std::size_t bit = static_cast<std::size_t>(u) * n_ + v;
        matrix_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
      }
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adj_;
  std::vector<std::uint64_t> matrix_;
};

/// Erdos-Renyi G(n,p). Pairs {i,j}, i<j, are visited in lexicographic order
/// with one Bernoulli draw each from the "edges" stream; above 2^14 nodes a
/// geometric skip sampler walks the same order.
inline Graph gen_gnp(std::size_t n, double p, const RandomSource& src) {
  if (n == 0) throw std::invalid_argument("gen_gnp: n must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gen_gnp: p must lie in [0,1]");
  auto rng = src.stream("edges");
  std::vector<std::pair<NodeId, NodeId>> edges;
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  edges.reserve(static_cast<std::size_t>(pairs * p * 1.05) + 16);

  if (p == 0.0 || n == 1) return Graph::from_edges(n, edges);
  if (n <= (std::size_t{1} << 14) || p == 1.0) {
    std::bernoulli_distribution coin(p);
    for (NodeId i = 0; i + 1 < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
  } else {
    std::geometric_distribution<std::uint64_t> skip(p);
    const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::uint64_t index = skip(rng);
    NodeId i = 0;
    std::uint64_t row_start = 0;  // linear index of pair (i, i+1)
    while (index < total) {
      while (index >= row_start + (n - 1 - i)) {
        row_start += n - 1 - i;
        ++i;
      }
      auto j = static_cast<NodeId>(i + 1 + (index - row_start));
      edges.emplace_back(i, j);
      index += 1 + skip(rng);
    }
  }
  return Graph::from_edges(n, edges);
}

/// (log2 n)^{3/2} / sqrt(n), capped at 1.
inline double p_formula(std::size_t n) {
  if (n < 2) throw std::invalid_argument("p_formula: n must be at least 2");
  const double lg = std::log2(static_cast<double>(n));
  return std::min(1.0, std::pow(lg, 1.5) / std::sqrt(static_cast<double>(n)));
}

namespace detail {

inline std::optional<std::uint32_t> diameter_by_bfs(const Graph& g) {
  const std::size_t n = g.size();
  std::uint32_t diameter = 0;
  std::vector<std::uint32_t> dist(n);
  std::queue<NodeId> queue;
  for (NodeId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<std::uint32_t>::max());
    dist[s] = 0;
    queue.push(s);
    std::size_t reached = 1;
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop();
      for (NodeId v : g.neighbors(u))
        if (dist[v] == std::numeric_limits<std::uint32_t>::max()) {
          dist[v] = dist[u] + 1;
          diameter = std::max(diameter, dist[v]);
          ++reached;
          queue.push(v);
        }
    }
    if (reached != n) return std::nullopt;
  }
  return diameter;
}

// All sources at once: reach_k(u) = reach_{k-1}(u) | OR_{w in N(u)} reach_{k-1}(w).
inline std::optional<std::uint32_t> diameter_by_bitsets(const Graph& g) {
  const std::size_t n = g.size();
  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> reach(n * words, 0), next(n * words, 0);
  for (NodeId u = 0; u < n; ++u) reach[u * words + (u >> 6)] |= std::uint64_t{1} << (u & 63);

  auto row_full = [&](const std::uint64_t* row) {
    for (std::size_t w = 0; w + 1 < words; ++w)
      if (row[w] != ~std::uint64_t{0}) return false;
    const std::size_t tail = n - 64 * (words - 1);
    const std::uint64_t mask = tail == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << tail) - 1;
    return row[words - 1] == mask;
  };
  auto all_full = [&] {
    for (NodeId u = 0; u < n; ++u)
      if (!row_full(&reach[u * words])) return false;
    return true;
  };

  std::uint32_t k = 0;
  while (!all_full()) {
    bool changed = false;
    for (NodeId u = 0; u < n; ++u) {
      std::uint64_t* out = &next[u * words];
      std::copy_n(&reach[u * words], words, out);
      for (NodeId w : g.neighbors(u)) {
        const std::uint64_t* in = &reach[w * words];
        for (std::size_t i = 0; i < words; ++i) out[i] |= in[i];
      }
      if (!changed && !std::equal(out, out + words, &reach[u * words])) changed = true;
    }
    if (!changed) return std::nullopt;
    reach.swap(next);
    ++k;
  }
  return k;
}

}  // namespace detail

/// Exact diameter, or nullopt when some pair is unreachable.
inline std::optional<std::uint32_t> empirical_diameter(const Graph& g) {
  if (g.size() <= 1) return 0u;
  if (g.size() <= 8192) return detail::diameter_by_bitsets(g);
  return detail::diameter_by_bfs(g);
}

/// Small named graphs used by tests, examples and the CLI.
namespace graphs {

inline Graph complete(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph::from_edges(n, e);
}

inline Graph path(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph::from_edges(n, e);
}

inline Graph cycle(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  return Graph::from_edges(n, e);
}

/// Star with center 0.
inline Graph star(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 1; i < n; ++i) e.emplace_back(0, i);
  return Graph::from_edges(n, e);
}

inline Graph empty(std::size_t n) { return Graph::from_edges(n, {}); }

inline Graph petersen() {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < 5; ++i) {
    e.emplace_back(i, (i + 1) % 5);                      // outer ring
    e.emplace_back(i, i + 5);                            // spokes
    e.emplace_back(i + 5, static_cast<NodeId>((i + 2) % 5 + 5));  // inner pentagram
  }
  return Graph::from_edges(10, e);
}

}  // namespace graphs

}  // namespace hamcycle
