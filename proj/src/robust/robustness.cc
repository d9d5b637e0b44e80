#include "fgl/robust/robustness.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <spdlog/spdlog.h>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"

namespace fgl {
namespace {

void CheckRate(double rate, const char* name) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error(ErrorCode::kConfig,
                std::string("robustness.") + name + " must be in [0,1], got " +
                    std::to_string(rate));
  }
}

// First `count` entries of a seeded permutation of `items`.
template <typename T>
std::vector<T> SampleWithoutReplacement(const std::vector<T>& items, int64_t count, Rng& rng) {
  auto perm = rng.Permutation(static_cast<int64_t>(items.size()));
  std::vector<T> out;
  out.reserve(count);
  for (int64_t i = 0; i < count; ++i) out.push_back(items[perm[i]]);
  return out;
}

int64_t FloorCount(double rate, size_t n) {
  return static_cast<int64_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}

}  // namespace

std::string_view NoiseKindName(NoiseKind kind) {
  return kind == NoiseKind::kGaussian ? "gaussian" : "laplacian";
}

NoiseKind ParseNoiseKind(std::string_view name) {
  if (name == "gaussian") return NoiseKind::kGaussian;
  if (name == "laplacian") return NoiseKind::kLaplacian;
  throw Error(ErrorCode::kConfig, "unknown noise kind '" + std::string(name) + "'");
}

void RobustnessSpec::Validate() const {
  if (!(feature_noise.sigma >= 0.0)) {
    throw Error(ErrorCode::kConfig, "robustness.feature_noise.sigma must be >= 0");
  }
  CheckRate(feature_noise.channel_fraction, "feature_noise.channel_fraction");
  CheckRate(label_noise_rate, "label_noise_rate");
  CheckRate(hetero_edge_fraction, "hetero_edge_fraction");
  CheckRate(feature_missing_rate, "feature_missing_rate");
  CheckRate(edge_drop_rate, "edge_drop_rate");
  CheckRate(label_keep_ratio, "label_keep_ratio");
  if (label_keep_ratio == 0.0) {
    throw Error(ErrorCode::kConfig, "robustness.label_keep_ratio must be > 0");
  }
}

bool RobustnessSpec::active() const {
  return (feature_noise.sigma > 0 && feature_noise.channel_fraction > 0) ||
         label_noise_rate > 0 || hetero_edge_fraction > 0 || feature_missing_rate > 0 ||
         edge_drop_rate > 0 || label_keep_ratio < 1;
}

Graph AddFeatureNoise(const Graph& g, NoiseKind kind, double sigma, double channel_fraction,
                      uint64_t seed) {
  Graph out = g;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  std::vector<int> channels(g.feature_dim());
  for (int c = 0; c < g.feature_dim(); ++c) channels[c] = c;
  auto chosen = SampleWithoutReplacement(channels, FloorCount(channel_fraction, channels.size()),
                                         rng);
  std::sort(chosen.begin(), chosen.end());
  for (int v = 0; v < g.num_nodes; ++v) {
    for (int c : chosen) {
      out.features(v, c) += kind == NoiseKind::kGaussian ? sigma * rng.Normal()
                                                         : rng.Laplace(sigma);
    }
  }
  return out;
}

Graph AddLabelNoise(const Graph& g, double rate, uint64_t seed) {
  Graph out = g;
  if (rate == 0.0) return out;
  if (g.num_classes < 2) {
    throw Error(ErrorCode::kConfig, "label noise needs at least 2 classes");
  }
  std::vector<int> train;
  for (int v : g.MaskIndices(g.train_mask)) {
    if (g.labels[v] != kUnlabeled) train.push_back(v);
  }
  Rng rng(seed);
  for (int v : SampleWithoutReplacement(train, FloorCount(rate, train.size()), rng)) {
    auto r = static_cast<int>(rng.UniformIndex(g.num_classes - 1));
    if (r >= g.labels[v]) ++r;
    out.labels[v] = r;
  }
  return out;
}

EdgeInjection AddHeterophilousEdges(const Graph& g, double fraction, uint64_t seed) {
  EdgeInjection result{g, FloorCount(fraction, static_cast<size_t>(g.num_edges())), 0};
  if (result.requested == 0) return result;
  std::vector<int> labeled;
  for (int v = 0; v < g.num_nodes; ++v) {
    if (g.labels[v] != kUnlabeled) labeled.push_back(v);
  }
  std::vector<Edge> edges = g.EdgeList();
  std::set<Edge> added;
  Rng rng(seed);
  constexpr int kTriesPerEdge = 10000;
  if (labeled.size() >= 2) {
    for (int64_t e = 0; e < result.requested; ++e) {
      bool placed = false;
      for (int t = 0; t < kTriesPerEdge && !placed; ++t) {
        int u = labeled[rng.UniformIndex(labeled.size())];
        int v = labeled[rng.UniformIndex(labeled.size())];
        if (u == v || g.labels[u] == g.labels[v]) continue;
        if (u > v) std::swap(u, v);
        if (g.HasEdge(u, v) || added.count({u, v})) continue;
        added.insert({u, v});
        edges.emplace_back(u, v);
        placed = true;
      }
      if (!placed) break;
    }
  }
  result.added = static_cast<int64_t>(added.size());
  if (result.shortfall() > 0) {
    spdlog::warn("heterophilous edge injection short by {} of {} edges", result.shortfall(),
                 result.requested);
  }
  result.graph.SetEdges(edges);
  return result;
}

Graph SparsifyFeatures(const Graph& g, double missing_rate, uint64_t seed) {
  Graph out = g;
  if (missing_rate == 0.0) return out;
  Rng rng(seed);
  for (int v = 0; v < g.num_nodes; ++v) {
    if (g.train_mask[v]) continue;
    for (double& x : out.features.row(v)) {
      if (rng.Bernoulli(missing_rate)) x = 0.0;
    }
  }
  return out;
}

Graph SparsifyEdges(const Graph& g, double drop_rate, uint64_t seed) {
  Graph out = g;
  if (drop_rate == 0.0) return out;
  const std::vector<Edge> edges = g.EdgeList();
  Rng rng(seed);
  auto perm = rng.Permutation(static_cast<int64_t>(edges.size()));
  const int64_t drop = FloorCount(drop_rate, edges.size());
  std::vector<uint8_t> removed(edges.size(), 0);
  for (int64_t i = 0; i < drop; ++i) removed[perm[i]] = 1;
  std::vector<Edge> kept;
  for (size_t i = 0; i < edges.size(); ++i) {
    if (!removed[i]) kept.push_back(edges[i]);
  }
  out.SetEdges(kept);
  return out;
}

Graph SparsifyLabels(const Graph& g, double keep_ratio, uint64_t seed) {
  Graph out = g;
  if (keep_ratio == 1.0) return out;
  const std::vector<int> train = g.MaskIndices(g.train_mask);
  const auto keep = static_cast<int64_t>(std::ceil(keep_ratio * train.size() - 1e-9));
  if (keep == 0) throw Error(ErrorCode::kConfig, "label sparsity leaves no training nodes");
  Rng rng(seed);
  std::fill(out.train_mask.begin(), out.train_mask.end(), 0);
  for (int v : SampleWithoutReplacement(train, keep, rng)) out.train_mask[v] = 1;
  return out;
}

RobustnessOutcome ApplyRobustness(const Graph& g, const RobustnessSpec& spec, uint64_t seed,
                                  int client) {
  spec.Validate();
  RobustnessOutcome out{g, 0};
  auto stream = [&](const char* name) {
    return DeriveSeed(seed, std::string("robust/") + name, client);
  };
  const auto& fn = spec.feature_noise;
  if (fn.sigma > 0 && fn.channel_fraction > 0) {
    out.graph = AddFeatureNoise(out.graph, fn.kind, fn.sigma, fn.channel_fraction,
                                stream("feature_noise"));
  }
  if (spec.label_noise_rate > 0) {
    out.graph = AddLabelNoise(out.graph, spec.label_noise_rate, stream("label_noise"));
  }
  if (spec.hetero_edge_fraction > 0) {
    auto inj = AddHeterophilousEdges(out.graph, spec.hetero_edge_fraction,
                                     stream("hetero_edges"));
    out.graph = std::move(inj.graph);
    out.edge_shortfall = inj.shortfall();
  }
  if (spec.feature_missing_rate > 0) {
    out.graph = SparsifyFeatures(out.graph, spec.feature_missing_rate, stream("feature_missing"));
  }
  if (spec.edge_drop_rate > 0) {
    out.graph = SparsifyEdges(out.graph, spec.edge_drop_rate, stream("edge_drop"));
  }
  if (spec.label_keep_ratio < 1) {
    out.graph = SparsifyLabels(out.graph, spec.label_keep_ratio, stream("label_keep"));
  }
  return out;
}

}  // namespace fgl
