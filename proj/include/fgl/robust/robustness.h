#pragma once

#include <cstdint>
#include <string_view>

#include "fgl/graph/graph.h"

namespace fgl {

enum class NoiseKind { kGaussian, kLaplacian };

std::string_view NoiseKindName(NoiseKind kind);
NoiseKind ParseNoiseKind(std::string_view name);

struct FeatureNoiseSpec {
  NoiseKind kind = NoiseKind::kGaussian;
  double sigma = 0.0;
  double channel_fraction = 0.0;

  bool operator==(const FeatureNoiseSpec&) const = default;
};

struct RobustnessSpec {
  FeatureNoiseSpec feature_noise;
  double label_noise_rate = 0.0;
  double hetero_edge_fraction = 0.0;
  double feature_missing_rate = 0.0;
  double edge_drop_rate = 0.0;
  double label_keep_ratio = 1.0;

  // Throws kConfig when a rate leaves [0,1], sigma < 0 or keep ratio is 0.
  void Validate() const;
  bool active() const;
  bool operator==(const RobustnessSpec&) const = default;
};

// Additive noise on floor(channel_fraction * f) seeded channels of every node.
Graph AddFeatureNoise(const Graph& g, NoiseKind kind, double sigma, double channel_fraction,
                      uint64_t seed);

// Reassigns floor(rate * |train|) training labels to a different class.
Graph AddLabelNoise(const Graph& g, double rate, uint64_t seed);

struct EdgeInjection {
  Graph graph;
  int64_t requested = 0;
  int64_t added = 0;

  int64_t shortfall() const { return requested - added; }
};

// Adds floor(fraction * m) edges between non-adjacent labeled nodes with
// different labels, by rejection sampling with at most 10^4 tries per edge.
EdgeInjection AddHeterophilousEdges(const Graph& g, double fraction, uint64_t seed);

// Zeroes each feature entry of non-training nodes with probability `missing_rate`.
Graph SparsifyFeatures(const Graph& g, double missing_rate, uint64_t seed);

// Removes floor(drop_rate * m) seeded edges.
Graph SparsifyEdges(const Graph& g, double drop_rate, uint64_t seed);

// Keeps a seeded ceil(keep_ratio * |train|) subset of the training mask.
Graph SparsifyLabels(const Graph& g, double keep_ratio, uint64_t seed);

struct RobustnessOutcome {
  Graph graph;
  int64_t edge_shortfall = 0;
};

// Applies every active injector of `spec` in a fixed order: feature noise,
// label noise, heterophilous edges, feature sparsity, edge drop, label
// sparsity. Each injector's stream is DeriveSeed(seed, "robust/<name>", client).
RobustnessOutcome ApplyRobustness(const Graph& g, const RobustnessSpec& spec, uint64_t seed,
                                  int client);

}  // namespace fgl
