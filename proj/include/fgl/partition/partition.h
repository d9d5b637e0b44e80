#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fgl/graph/graph.h"

namespace fgl {

enum class PartitionStrategy {
  kFeatureSkew,
  kLabelDirichlet,
  kCrossDomain,
  kTopologySkew,
  kMetisCommunity,
  kLouvainCommunity,
  kMetisLabelImbalance,
  kLouvainLabelImbalance,
};

std::string_view StrategyName(PartitionStrategy strategy);
PartitionStrategy ParseStrategy(std::string_view name);

enum class FeatureSkewMode { kGaussian, kLaplacian, kScale };

std::string_view FeatureSkewName(FeatureSkewMode mode);
FeatureSkewMode ParseFeatureSkewMode(std::string_view name);

struct FeatureSkewSpec {
  FeatureSkewMode mode = FeatureSkewMode::kGaussian;
  double lo = 0.0;
  double hi = 1.0;

  bool operator==(const FeatureSkewSpec&) const = default;
};

struct PartitionSpec {
  PartitionStrategy strategy = PartitionStrategy::kMetisCommunity;
  int num_clients = 10;
  double alpha = 1.0;
  double resolution = 1.0;
  double imbalance_eps = 0.05;
  double capacity_beta = 0.3;
  uint64_t seed = 0;
  // Sample-to-client split used under the feature-skew strategy.
  FeatureSkewSpec feature_skew;

  // Throws kConfig on K < 1, alpha <= 0, resolution <= 0 or eps < 0.
  void Validate() const;
  bool operator==(const PartitionSpec&) const = default;
};

// owner[i] is the client of sample i (node or graph).
struct ClientAssignment {
  std::vector<int> owner;
  int num_clients = 0;

  std::vector<std::vector<int>> Members() const;
  std::vector<int> Sizes() const;
  // Throws kInfeasiblePartition if an owner is out of range or a client is empty.
  void Validate() const;
};

struct CommunityDecomposition {
  std::vector<int> community;                 // per node
  std::vector<std::vector<int>> members;      // per community, ascending
  std::vector<std::vector<double>> label_histograms;  // normalized, per community
  // Modularity after each Louvain level (empty for other sources).
  std::vector<double> level_modularity;

  int count() const { return static_cast<int>(members.size()); }
};

// Builds members/histograms from a per-node community id (ids renumbered in
// order of first appearance).
CommunityDecomposition DecompositionFromLabels(const Graph& g,
                                               std::span<const int> community);

// Modularity of `community` at the given resolution; 0 for edgeless graphs.
double Modularity(const Graph& g, std::span<const int> community, double resolution);

int64_t EdgeCut(const Graph& g, std::span<const int> part);

// --- label-driven and graph-independent splits ---

ClientAssignment DirichletLabelSplit(std::span<const int> labels, int num_clients,
                                     double alpha, uint64_t seed);

// Seeded uniform assignment with client sizes differing by at most one.
ClientAssignment UniformSplit(int num_samples, int num_clients, uint64_t seed);

// --- community detection ---

CommunityDecomposition LouvainCommunities(const Graph& g, double resolution,
                                          uint64_t seed);

ClientAssignment MetisKway(const Graph& g, int num_clients, double imbalance_eps,
                           uint64_t seed);

// Largest-first greedy assignment of communities to the least loaded client.
ClientAssignment CommunitiesToClientsAverage(const CommunityDecomposition& comms,
                                             int num_clients);

// Groups communities by label-histogram similarity under a size cap of
// (1 + capacity_beta) * ceil(n / K). Exact search for at most
// kExactGroupingLimit communities, agglomerative merging above it.
inline constexpr int kExactGroupingLimit = 8;

ClientAssignment CommunitiesToClientsLabelCluster(const CommunityDecomposition& comms,
                                                  int num_clients,
                                                  double capacity_beta);

// Objective maximised by the exact label-cluster search: sum over groups of
// sum over member communities of size * cosine(histogram, group vector),
// where the group vector is the size-weighted histogram sum.
double GroupingCohesion(const CommunityDecomposition& comms,
                        std::span<const int> group_of_community);

// --- Graph-FL splits ---

ClientAssignment TopologySkewSplit(const GraphCollection& coll, int num_clients);

// Samples are the concatenation of the datasets in order.
ClientAssignment CrossDomainSplit(std::span<const int> dataset_sizes, int num_clients);

// --- client data construction ---

struct ClientSplit {
  std::vector<ClientSubgraph> clients;
  int64_t dropped_edges = 0;
};

ClientSplit BuildClientSubgraphs(const Graph& g, const ClientAssignment& assignment);

// Applies client `client`'s perturbation in place to every graph it holds.
void FeatureSkewApplyClient(std::span<Graph> graphs, const FeatureSkewSpec& skew,
                            uint64_t seed, int client);

// Copies of `graphs` with client-specific feature perturbation applied.
std::vector<Graph> FeatureSkewApply(std::span<const Graph> client_graphs,
                                    const FeatureSkewSpec& skew, uint64_t seed);

// Dispatches a Subgraph-FL strategy. `community` receives the detected
// communities for the community-based strategies.
ClientAssignment PartitionNodes(const Graph& g, const PartitionSpec& spec,
                                std::vector<int>* community = nullptr);

// Dispatches a Graph-FL strategy over one collection.
ClientAssignment PartitionGraphs(const GraphCollection& coll, const PartitionSpec& spec);

}  // namespace fgl
