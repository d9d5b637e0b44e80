#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fgl/common/matrix.h"
#include "fgl/graph/graph.h"

namespace fgl {

// Normalised histogram of labeled nodes per client; all zeros when a client
// has no labeled node.
std::vector<std::vector<double>> LabelDistribution(std::span<const Graph> clients,
                                                   int num_classes);

// Same, over explicit per-client sample labels (graph labels in Graph-FL).
std::vector<std::vector<double>> LabelDistribution(
    const std::vector<std::vector<int>>& sample_labels, int num_classes);

inline constexpr int kDefaultKlBins = 16;

// Symmetric K x K matrix of per-dimension smoothed histogram KL divergences,
// averaged over all feature dimensions. Each dimension is binned over its
// global range; dimensions with zero range contribute 0.
Matrix FeatureKlMatrix(std::span<const Graph> clients, int bins = kDefaultKlBins);

// Fraction of edges with both endpoints labeled that join equal labels.
std::optional<double> EdgeHomophily(const Graph& g);

// Mean over labeled nodes with a labeled neighbor of the same-label fraction
// among labeled neighbors.
std::optional<double> NodeHomophily(const Graph& g);

struct TopologyRecord {
  double degree_mean = 0.0;
  double degree_std = 0.0;
  int degree_max = 0;
  double centrality_mean = 0.0;
  double largest_component_fraction = 0.0;
};

TopologyRecord TopologyReport(const Graph& g);

struct HeterogeneityReport {
  std::vector<std::vector<double>> label_histograms;
  Matrix feature_kl;
  std::vector<std::optional<double>> edge_homophily;
  std::vector<std::optional<double>> node_homophily;
  std::vector<TopologyRecord> topology;
  int64_t dropped_edges = 0;
};

// `sample_labels` overrides the node-label histograms when given.
HeterogeneityReport BuildHeterogeneityReport(
    std::span<const Graph> clients, int num_classes, int64_t dropped_edges,
    const std::vector<std::vector<int>>* sample_labels = nullptr,
    int bins = kDefaultKlBins);

// Disjoint union, for summarising a client that holds many small graphs.
Graph DisjointUnion(std::span<const Graph> graphs);

}  // namespace fgl
