#include <gtest/gtest.h>

#include <cmath>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"
#include "fgl/graph/algorithms.h"
#include "fgl/partition/partition.h"
#include "fgl/stats/stats.h"
#include "unit/fixtures.h"
#include "unit/homophily_oracle.h"

namespace fgl {
namespace {

using testing::MakeGraph;

TEST(LabelDistribution, Basic) {
  std::vector<Graph> clients{MakeGraph(3, {}, {0, 0, 1})};
  auto h = LabelDistribution(clients, 2);
  EXPECT_DOUBLE_EQ(h[0][0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(h[0][1], 1.0 / 3.0);
}

TEST(LabelDistribution, NoLabeledNodesIsZero) {
  std::vector<Graph> clients{MakeGraph(3, {})};
  auto h = LabelDistribution(clients, 2);
  EXPECT_EQ(h[0], (std::vector<double>{0.0, 0.0}));
}

TEST(LabelDistribution, DirichletSkewOnSbm) {
  Graph g = GenerateSbm({300, 300, 300}, 0.05, 0.005, 3, 1);
  auto tv_for = [&](double alpha) {
    double total = 0.0;
    for (uint64_t seed = 0; seed < 5; ++seed) {
      auto split = BuildClientSubgraphs(g, DirichletLabelSplit(g.labels, 5, alpha, seed));
      std::vector<Graph> graphs;
      for (auto& c : split.clients) graphs.push_back(c.graph);
      auto h = LabelDistribution(graphs, 3);
      for (size_t a = 0; a < h.size(); ++a) {
        for (size_t b = a + 1; b < h.size(); ++b) {
          for (int c = 0; c < 3; ++c) total += 0.5 * std::fabs(h[a][c] - h[b][c]);
        }
      }
    }
    return total;
  };
  EXPECT_GT(tv_for(0.1), tv_for(100.0));
}

Graph ValuesGraph(const std::vector<double>& values) {
  Graph g = MakeGraph(static_cast<int>(values.size()), {});
  for (size_t v = 0; v < values.size(); ++v) g.features(v, 0) = values[v];
  return g;
}

TEST(FeatureKl, IdenticalClientsAreZero) {
  std::vector<Graph> clients{ValuesGraph({0, 1, 2}), ValuesGraph({0, 1, 2})};
  auto kl = FeatureKlMatrix(clients, 4);
  EXPECT_EQ(kl(0, 1), 0.0);
  EXPECT_EQ(kl(0, 0), 0.0);
}

TEST(FeatureKl, HandEvaluatedTwoBins) {
  std::vector<Graph> clients{ValuesGraph({0, 0, 1, 1}), ValuesGraph({0, 1, 1, 1})};
  // Smoothed histograms: [3,3]/6 and [2,4]/6.
  const double p0 = 0.5, p1 = 0.5, q0 = 2.0 / 6.0, q1 = 4.0 / 6.0;
  const double kl_pq = p0 * std::log(p0 / q0) + p1 * std::log(p1 / q1);
  const double kl_qp = q0 * std::log(q0 / p0) + q1 * std::log(q1 / p1);
  auto kl = FeatureKlMatrix(clients, 2);
  EXPECT_NEAR(kl(0, 1), 0.5 * (kl_pq + kl_qp), 1e-15);
  EXPECT_EQ(kl(0, 1), kl(1, 0));
}

TEST(FeatureKl, ZeroRangeDimensionContributesZero) {
  Graph a = MakeGraph(2, {}, {}, 2);
  Graph b = MakeGraph(2, {}, {}, 2);
  a.features = Matrix(2, 2, 0.0);
  b.features = Matrix(2, 2, 0.0);
  a.features(0, 0) = 1.0;
  std::vector<Graph> both{a, b};
  std::vector<Graph> first_dim_only{ValuesGraph({1, 0}), ValuesGraph({0, 0})};
  EXPECT_NEAR(FeatureKlMatrix(both, 2)(0, 1), FeatureKlMatrix(first_dim_only, 2)(0, 1) / 2,
              1e-15);
}

TEST(FeatureKl, SymmetricNonNegative) {
  std::vector<Graph> clients;
  for (uint64_t s = 0; s < 4; ++s) clients.push_back(testing::RandomGraph(20, 0.1, s));
  auto kl = FeatureKlMatrix(clients, 8);
  for (size_t a = 0; a < 4; ++a) {
    EXPECT_EQ(kl(a, a), 0.0);
    for (size_t b = 0; b < 4; ++b) {
      EXPECT_EQ(kl(a, b), kl(b, a));
      EXPECT_GE(kl(a, b), 0.0);
    }
  }
  EXPECT_THROW(FeatureKlMatrix(clients, 1), Error);
}

TEST(Homophily, Examples) {
  EXPECT_EQ(EdgeHomophily(MakeGraph(2, {{0, 1}}, {0, 0})), 1.0);
  EXPECT_EQ(EdgeHomophily(MakeGraph(2, {{0, 1}}, {0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(*EdgeHomophily(MakeGraph(3, {{0, 1}, {1, 2}, {0, 2}}, {0, 0, 1})),
                   1.0 / 3.0);
  EXPECT_EQ(NodeHomophily(MakeGraph(2, {{0, 1}}, {0, 0})), 1.0);
  EXPECT_EQ(NodeHomophily(MakeGraph(4, {{0, 1}, {0, 2}, {0, 3}}, {0, 1, 1, 1})), 0.0);
  EXPECT_FALSE(NodeHomophily(MakeGraph(3, {}, {0, 1, 0})).has_value());
  EXPECT_FALSE(EdgeHomophily(MakeGraph(3, {}, {0, 1, 0})).has_value());
  EXPECT_FALSE(EdgeHomophily(MakeGraph(2, {{0, 1}})).has_value());
}

// Graph from a dense adjacency, checked against the enumeration oracle.
void CheckAgainstEnumeration(const std::vector<std::vector<bool>>& adj,
                             const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (adj[u][v]) edges.emplace_back(u, v);
    }
  }
  Graph g = MakeGraph(n, edges);
  g.labels = labels;
  g.num_classes = 2;
  const auto expected = testing::HomophilyByEnumeration(adj, labels);
  auto edge = EdgeHomophily(g);
  auto node = NodeHomophily(g);
  ASSERT_EQ(edge.has_value(), expected.edge.has_value());
  ASSERT_EQ(node.has_value(), expected.node.has_value());
  if (edge) EXPECT_NEAR(*edge, *expected.edge, 1e-15);
  if (node) EXPECT_NEAR(*node, *expected.node, 1e-15);
}

TEST(Homophily, ExhaustiveSmallGraphs) {
  // Unlabeled nodes are included up to 4 nodes; 5-node graphs are fully labeled.
  testing::ForEachSmallLabeledGraph(
      5,
      [](int n) { return n <= 4 ? std::vector<int>{-1, 0, 1} : std::vector<int>{0, 1}; },
      CheckAgainstEnumeration);
}

TEST(Topology, Examples) {
  auto tri = TopologyReport(MakeGraph(3, {{0, 1}, {1, 2}, {0, 2}}));
  EXPECT_EQ(tri.degree_mean, 2.0);
  EXPECT_EQ(tri.centrality_mean, 1.0);
  EXPECT_EQ(tri.largest_component_fraction, 1.0);
  auto edgeless = TopologyReport(MakeGraph(4, {}));
  EXPECT_EQ(edgeless.degree_mean, 0.0);
  EXPECT_EQ(edgeless.largest_component_fraction, 0.25);
  auto bridge = TopologyReport(testing::TwoCliquesBridge(4));
  EXPECT_EQ(bridge.largest_component_fraction, 1.0);
  EXPECT_EQ(bridge.degree_max, 4);
  EXPECT_EQ(TopologyReport(MakeGraph(1, {})).centrality_mean, 0.0);
}

Graph Permuted(const Graph& g, const std::vector<int64_t>& perm) {
  std::vector<Edge> edges;
  for (auto [u, v] : g.EdgeList()) edges.emplace_back(perm[u], perm[v]);
  std::vector<int> labels(g.num_nodes);
  Graph out = MakeGraph(g.num_nodes, edges, {}, g.feature_dim());
  for (int v = 0; v < g.num_nodes; ++v) {
    labels[perm[v]] = g.labels[v];
    for (int d = 0; d < g.feature_dim(); ++d) out.features(perm[v], d) = g.features(v, d);
  }
  out.labels = labels;
  out.num_classes = g.num_classes;
  return out;
}

TEST(HeterogeneityReport, NodeOrderInvariant) {
  std::vector<Graph> clients{testing::RandomGraph(15, 0.3, 1, 3),
                             testing::RandomGraph(12, 0.3, 2, 3)};
  std::vector<Graph> permuted{clients[0], Permuted(clients[1], Rng(5).Permutation(12))};
  auto a = BuildHeterogeneityReport(clients, 3, 0);
  auto b = BuildHeterogeneityReport(permuted, 3, 0);
  EXPECT_EQ(a.label_histograms, b.label_histograms);
  EXPECT_EQ(a.feature_kl, b.feature_kl);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(*a.edge_homophily[k], *b.edge_homophily[k], 1e-12);
    EXPECT_NEAR(*a.node_homophily[k], *b.node_homophily[k], 1e-12);
    EXPECT_NEAR(a.topology[k].degree_std, b.topology[k].degree_std, 1e-12);
    EXPECT_EQ(a.topology[k].largest_component_fraction,
              b.topology[k].largest_component_fraction);
  }
}

TEST(HeterogeneityReport, SingleClient) {
  std::vector<Graph> clients{testing::RandomGraph(10, 0.3, 1)};
  auto r = BuildHeterogeneityReport(clients, 2, 0);
  EXPECT_EQ(r.feature_kl, Matrix(1, 1, 0.0));
}

TEST(DisjointUnion, OffsetsEdgesAndLabels) {
  std::vector<Graph> graphs{MakeGraph(2, {{0, 1}}, {0, 1}), MakeGraph(3, {{0, 2}}, {1, 1, 0})};
  Graph u = DisjointUnion(graphs);
  EXPECT_EQ(u.num_nodes, 5);
  EXPECT_TRUE(u.HasEdge(2, 4));
  EXPECT_FALSE(u.HasEdge(1, 2));
  EXPECT_EQ(u.labels, (std::vector<int>{0, 1, 1, 1, 0}));
}

}  // namespace
}  // namespace fgl
