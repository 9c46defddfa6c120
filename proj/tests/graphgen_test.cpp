#include <cmath>
#include <queue>

#include <gtest/gtest.h>

#include "hamcycle/graph.hpp"

namespace hamcycle {
namespace {

void expect_simple(const Graph& g) {
  for (NodeId u = 0; u < g.size(); ++u) {
    auto nb = g.neighbors(u);
    EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    EXPECT_EQ(std::adjacent_find(nb.begin(), nb.end()), nb.end());
    for (NodeId w : nb) {
      EXPECT_NE(u, w);
      EXPECT_TRUE(g.has_edge(w, u));
    }
  }
}

// Reference eccentricity maximum via plain queue BFS.
std::optional<std::uint32_t> reference_diameter(const Graph& g) {
  std::uint32_t best = 0;
  for (NodeId s = 0; s < g.size(); ++s) {
    std::vector<int> d(g.size(), -1);
    std::queue<NodeId> q;
    d[s] = 0;
    q.push(s);
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (NodeId w : g.neighbors(u))
        if (d[w] < 0) d[w] = d[u] + 1, q.push(w);
    }
    for (int x : d) {
      if (x < 0) return std::nullopt;
      best = std::max<std::uint32_t>(best, x);
    }
  }
  return best;
}

TEST(GnpGenerator, SingleNodeHasNoEdges) {
  EXPECT_EQ(gen_gnp(1, 0.9, RandomSource(3)).edge_count(), 0u);
}

TEST(GnpGenerator, ProbabilityOneGivesTriangle) {
  EXPECT_EQ(gen_gnp(3, 1.0, RandomSource(3)), graphs::complete(3));
}

TEST(GnpGenerator, RejectsBadArguments) {
  EXPECT_THROW(gen_gnp(0, 0.5, RandomSource(1)), std::invalid_argument);
  EXPECT_THROW(gen_gnp(5, -0.1, RandomSource(1)), std::invalid_argument);
  EXPECT_THROW(gen_gnp(5, 1.5, RandomSource(1)), std::invalid_argument);
  EXPECT_THROW(gen_gnp(5, std::nan(""), RandomSource(1)), std::invalid_argument);
}

TEST(GnpGenerator, SameSeedSameGraph) {
  EXPECT_EQ(gen_gnp(300, 0.2, RandomSource(77)), gen_gnp(300, 0.2, RandomSource(77)));
  EXPECT_FALSE(gen_gnp(300, 0.2, RandomSource(77)) == gen_gnp(300, 0.2, RandomSource(78)));
}

TEST(GnpGenerator, GraphsAreSimpleAndSymmetric) {
  for (std::uint64_t s = 0; s < 5; ++s) expect_simple(gen_gnp(200, 0.3, RandomSource(s)));
  expect_simple(gen_gnp(20000, 0.0005, RandomSource(9)));
}

TEST(GnpGenerator, EdgeCountWithinThreeSigmaAtHalf) {
  const double pairs = 1000.0 * 999 / 2;
  const double sd = std::sqrt(pairs * 0.25);
  const auto m = static_cast<double>(gen_gnp(1000, 0.5, RandomSource(2024)).edge_count());
  EXPECT_LE(std::abs(m - pairs * 0.5), 3 * sd);
}

TEST(GnpGenerator, MeanEdgeCountOverSeedsWithinOnePercent) {
  const double expected = 500.0 * 499 / 2 * 0.1;
  double total = 0;
  for (std::uint64_t s = 0; s < 200; ++s) total += gen_gnp(500, 0.1, RandomSource(s)).edge_count();
  EXPECT_LE(std::abs(total / 200 - expected), 0.01 * expected);
}

TEST(GnpGenerator, SkipSamplerMatchesBinomialMean) {
  const double pairs = 20000.0 * 19999 / 2;
  const double p = 0.0005;
  const auto m = static_cast<double>(gen_gnp(20000, p, RandomSource(5)).edge_count());
  EXPECT_LE(std::abs(m - pairs * p), 4 * std::sqrt(pairs * p * (1 - p)));
}

TEST(EdgeProbability, MatchesDirectEvaluation) {
  EXPECT_NEAR(p_formula(1024), std::pow(10.0, 1.5) / 32.0, 1e-12);
  EXPECT_NEAR(p_formula(1024), 0.98821, 1e-5);
  EXPECT_DOUBLE_EQ(p_formula(4), 1.0);
  EXPECT_DOUBLE_EQ(p_formula(65536), 0.25);
  EXPECT_THROW(p_formula(1), std::invalid_argument);
}

TEST(Diameter, SmallGraphs) {
  EXPECT_EQ(empirical_diameter(graphs::complete(3)), 1u);
  EXPECT_EQ(empirical_diameter(graphs::path(3)), 2u);
  EXPECT_EQ(empirical_diameter(graphs::path(9)), 8u);
  EXPECT_EQ(empirical_diameter(graphs::star(6)), 2u);
  EXPECT_EQ(empirical_diameter(graphs::petersen()), 2u);
  EXPECT_EQ(empirical_diameter(graphs::empty(3)), std::nullopt);
}

TEST(Diameter, BitsetAndQueueAgreeOnRandomGraphs) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Graph g = gen_gnp(70 + s, 0.03 + 0.01 * (s % 7), RandomSource(s));
    EXPECT_EQ(detail::diameter_by_bitsets(g), reference_diameter(g)) << "seed " << s;
    EXPECT_EQ(detail::diameter_by_bfs(g), reference_diameter(g)) << "seed " << s;
  }
}

TEST(GraphFromEdges, DeduplicatesAndRejectsLoops) {
  std::vector<std::pair<NodeId, NodeId>> e{{0, 1}, {1, 0}, {1, 2}};
  const Graph g = Graph::from_edges(3, e);
  EXPECT_EQ(g.edge_count(), 2u);
  std::vector<std::pair<NodeId, NodeId>> loop{{1, 1}};
  EXPECT_THROW(Graph::from_edges(3, loop), std::invalid_argument);
  std::vector<std::pair<NodeId, NodeId>> out{{0, 3}};
  EXPECT_THROW(Graph::from_edges(3, out), std::invalid_argument);
}

TEST(RandomStreams, DeriveIsPureAndTagged) {
  RandomSource a(42), b(42);
  EXPECT_EQ(a.stream("edges")(), b.stream("edges")());
  EXPECT_NE(a.derive("edges"), a.derive("node"));
  EXPECT_NE(a.derive("node", 1), a.derive("node", 2));
}

TEST(RandomStreams, ReservoirIsUniform) {
  Rng rng(5);
  std::array<int, 4> hits{};
  for (int t = 0; t < 40000; ++t) {
    Reservoir<int> r;
    for (int i = 0; i < 4; ++i) r.offer(i, rng);
    ++hits[*r.pick()];
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 400);
}

}  // namespace
}  // namespace hamcycle
