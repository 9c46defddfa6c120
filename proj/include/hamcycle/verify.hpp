#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hamcycle/graph.hpp"
#include "hamcycle/label.hpp"
#include "hamcycle/node_state.hpp"

namespace hamcycle {

struct CycleReport {
  bool is_closed = false;
  bool covers_all = false;
  bool edges_exist = false;
  std::size_t length = 0;
  std::optional<Label> min_gap;  // smallest positive step between consecutive numbers, wrap excluded
  bool ascending = false;
  bool prev_consistent = false;  // prev(next(u)) == u along the walk

  bool is_hamiltonian(std::size_t n) const noexcept {
    return is_closed && covers_all && edges_exist && length == n;
  }
};

/// Walks next pointers from v0 for at most n+1 steps. Reads node state
/// only, never the algorithm's own bookkeeping.
inline CycleReport verify_cycle(const Graph& g, std::span<const NodeState> states, NodeId v0) {
  CycleReport r;
  const std::size_t n = states.size();
  if (v0 >= n || g.size() != n) return r;
  std::vector<char> seen(n, 0);
  bool edges = true, ascending = states[v0].label == Label(0), links = true;
  NodeId u = v0;
  seen[v0] = 1;
  std::size_t length = 1;
  for (std::size_t step = 0; step <= n; ++step) {
    const auto& s = states[u];
    if (!s.next || *s.next >= n) break;
    const NodeId w = *s.next;
    edges = edges && g.has_edge(u, w);
    links = links && states[w].prev == u;
    if (w == v0) {
      r.is_closed = true;
      break;
    }
    if (seen[w]) break;
    seen[w] = 1;
    ++length;
    const auto& a = s.label;
    const auto& b = states[w].label;
    if (!a || !b || !(*a < *b)) {
      ascending = false;
    } else {
      Label gap = *b - *a;
      if (!r.min_gap || gap < *r.min_gap) r.min_gap = gap;
    }
    u = w;
  }
  r.length = length;
  r.covers_all = r.is_closed && length == n;
  r.edges_exist = edges;
  r.ascending = ascending && r.is_closed;
  r.prev_consistent = links && r.is_closed;
  return r;
}

struct NumberingReport {
  bool ascending = false;
  bool distinct = false;
  std::optional<Label> min_gap;
};

/// Checks the numbers along the closed cycle through v0.
inline NumberingReport verify_numbering(std::span<const NodeState> states, NodeId v0) {
  NumberingReport r;
  std::vector<Label> order;
  const std::size_t n = states.size();
  if (v0 >= n) return r;
  NodeId u = v0;
  for (std::size_t step = 0; step < n; ++step) {
    if (!states[u].label) return r;
    order.push_back(*states[u].label);
    if (!states[u].next || *states[u].next >= n) return r;
    u = *states[u].next;
    if (u == v0) break;
  }
  if (u != v0) return r;
  r.ascending = order.front() == Label(0);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i - 1] < order[i]) {
      Label gap = order[i] - order[i - 1];
      if (!r.min_gap || gap < *r.min_gap) r.min_gap = gap;
    } else {
      r.ascending = false;
      if (order[i] == order[i - 1]) r.min_gap = Label(0);
    }
  }
  std::sort(order.begin(), order.end());
  r.distinct = std::adjacent_find(order.begin(), order.end()) == order.end();
  return r;
}

inline constexpr std::size_t kExactOracleMaxNodes = 20;

/// Subset dynamic programming over paths starting at node 0. reach[mask]
/// holds the possible end nodes of a path visiting exactly mask.
inline bool exact_hamiltonian(const Graph& g) {
  const std::size_t n = g.size();
  if (n > kExactOracleMaxNodes) throw std::invalid_argument("exact_hamiltonian: n must be at most 20");
  if (n < 3) return false;
  std::vector<std::uint32_t> adj(n, 0);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId w : g.neighbors(u)) adj[u] |= 1u << w;
  const std::uint32_t full = (1u << n) - 1;
  std::vector<std::uint32_t> reach(std::size_t{full} + 1, 0);
  reach[1] = 1;
  for (std::uint32_t mask = 1; mask <= full; mask += 2) {
    std::uint32_t ends = reach[mask];
    if (!ends) continue;
    std::uint32_t frontier = 0;
    for (std::uint32_t e = ends; e; e &= e - 1) frontier |= adj[std::countr_zero(e)];
    for (std::uint32_t ext = frontier & ~mask; ext; ext &= ext - 1) {
      const std::uint32_t bit = ext & (~ext + 1);
      reach[mask | bit] |= bit;
    }
  }
  return (reach[full] & adj[0]) != 0;
}

}  // namespace hamcycle
