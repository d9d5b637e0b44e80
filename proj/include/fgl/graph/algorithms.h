#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fgl/graph/graph.h"

namespace fgl {

struct SplitRatios {
  double train = 0.2;
  double val = 0.4;
  double test = 0.4;

  bool operator==(const SplitRatios&) const = default;
};

struct SplitMasks {
  Mask train;
  Mask val;
  Mask test;
};

// Seeded shuffle of 0..n-1 cut at floor(train*n) and floor((train+val)*n).
SplitMasks GenerateMasks(int n, const SplitRatios& ratios, uint64_t seed);

struct Components {
  std::vector<int> id;     // per node, numbered by smallest member
  std::vector<int> sizes;  // per component

  int count() const { return static_cast<int>(sizes.size()); }
  int largest() const;
};

Components ConnectedComponents(const Graph& g);

// Stochastic block model. Labels are block ids; each feature row is the
// one-hot of (label mod feature_dim) plus N(0, jitter^2) noise.
Graph GenerateSbm(const std::vector<int>& block_sizes, double p_in, double p_out,
                  int feature_dim, uint64_t seed, double jitter = 0.1);

// Labeled graph with many small planted communities, used as a stand-in for
// citation benchmarks. Each community has a dominant class; `purity` is the
// probability a member carries it. Features are sparse binary bag-of-words
// vectors where each class owns a block of "topic" dimensions.
struct PlantedCommunityParams {
  int num_nodes = 1000;
  int num_classes = 5;
  int num_communities = 50;
  int feature_dim = 100;
  double purity = 0.9;
  double intra_degree = 4.0;   // expected neighbors inside the community
  double inter_degree = 0.4;   // expected neighbors outside it
  double background_rate = 0.01;
  double topic_rate = 0.05;
  int topic_size = 20;
};

Graph GeneratePlantedCommunities(const PlantedCommunityParams& params, uint64_t seed);

// Graph with masks from GenerateMasks applied.
void ApplyMasks(Graph& g, const SplitMasks& masks);

}  // namespace fgl
