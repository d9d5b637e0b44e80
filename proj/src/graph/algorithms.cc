#include "fgl/graph/algorithms.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"

namespace fgl {
namespace {

// Calls fn(i) for each i in [0, total) kept independently with probability p,
// skipping ahead geometrically.
template <typename Fn>
void ForEachBernoulliIndex(uint64_t total, double p, Rng& rng, Fn&& fn) {
  if (p <= 0.0 || total == 0) return;
  if (p >= 1.0) {
    for (uint64_t i = 0; i < total; ++i) fn(i);
    return;
  }
  const double log_q = std::log1p(-p);
  uint64_t i = 0;
  while (true) {
    double u = rng.Uniform();
    while (u <= 0.0) u = rng.Uniform();
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(total - i)) return;
    i += static_cast<uint64_t>(skip);
    fn(i);
    ++i;
    if (i >= total) return;
  }
}

// Pairs (a, b) with a < b among `members`, each kept with probability p.
void SampleWithinBlock(const std::vector<int>& members, double p, Rng& rng,
                       std::vector<Edge>& edges) {
  const uint64_t b = members.size();
  if (b < 2) return;
  const uint64_t total = b * (b - 1) / 2;
  uint64_t row = 0;
  uint64_t row_start = 0;  // linear index of (row, row+1)
  ForEachBernoulliIndex(total, p, rng, [&](uint64_t idx) {
    while (idx >= row_start + (b - 1 - row)) {
      row_start += b - 1 - row;
      ++row;
    }
    const uint64_t col = row + 1 + (idx - row_start);
    edges.emplace_back(members[row], members[col]);
  });
}

void SampleBetweenBlocks(const std::vector<int>& left, const std::vector<int>& right,
                         double p, Rng& rng, std::vector<Edge>& edges) {
  const uint64_t cols = right.size();
  ForEachBernoulliIndex(left.size() * cols, p, rng, [&](uint64_t idx) {
    edges.emplace_back(left[idx / cols], right[idx % cols]);
  });
}

}  // namespace

SplitMasks GenerateMasks(int n, const SplitRatios& ratios, uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      ratios.train + ratios.val + ratios.test > 1.0 + 1e-12) {
    throw Error(ErrorCode::kConfig,
                "split ratios must be non-negative with sum <= 1");
  }
  Rng rng(seed);
  auto perm = rng.Permutation(n);
  const auto train_end = static_cast<int64_t>(std::floor(ratios.train * n + 1e-9));
  const auto val_end =
      static_cast<int64_t>(std::floor((ratios.train + ratios.val) * n + 1e-9));
  const auto test_end = std::min<int64_t>(
      n, static_cast<int64_t>(
             std::floor((ratios.train + ratios.val + ratios.test) * n + 1e-9)));
  SplitMasks masks{Mask(n, 0), Mask(n, 0), Mask(n, 0)};
  for (int64_t i = 0; i < n; ++i) {
    const auto v = perm[i];
    if (i < train_end) {
      masks.train[v] = 1;
    } else if (i < val_end) {
      masks.val[v] = 1;
    } else if (i < test_end) {
      masks.test[v] = 1;
    }
  }
  return masks;
}

void ApplyMasks(Graph& g, const SplitMasks& masks) {
  g.train_mask = masks.train;
  g.val_mask = masks.val;
  g.test_mask = masks.test;
}

int Components::largest() const {
  return sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
}

Components ConnectedComponents(const Graph& g) {
  Components comps;
  comps.id.assign(g.num_nodes, -1);
  std::deque<int> queue;
  for (int start = 0; start < g.num_nodes; ++start) {
    if (comps.id[start] >= 0) continue;
    const int cid = comps.count();
    comps.sizes.push_back(0);
    comps.id[start] = cid;
    queue.push_back(start);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      ++comps.sizes[cid];
      for (int v : g.Neighbors(u)) {
        if (comps.id[v] < 0) {
          comps.id[v] = cid;
          queue.push_back(v);
        }
      }
    }
  }
  return comps;
}

Graph GenerateSbm(const std::vector<int>& block_sizes, double p_in, double p_out,
                  int feature_dim, uint64_t seed, double jitter) {
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1) {
    throw Error(ErrorCode::kConfig, "SBM probabilities must lie in [0, 1]");
  }
  Rng rng(seed);
  Graph g;
  std::vector<std::vector<int>> blocks(block_sizes.size());
  for (size_t b = 0; b < block_sizes.size(); ++b) {
    for (int i = 0; i < block_sizes[b]; ++i) {
      blocks[b].push_back(g.num_nodes++);
      g.labels.push_back(static_cast<int>(b));
    }
  }
  g.num_classes = static_cast<int>(block_sizes.size());

  std::vector<Edge> edges;
  for (size_t a = 0; a < blocks.size(); ++a) {
    SampleWithinBlock(blocks[a], p_in, rng, edges);
    for (size_t b = a + 1; b < blocks.size(); ++b) {
      SampleBetweenBlocks(blocks[a], blocks[b], p_out, rng, edges);
    }
  }
  g.SetEdges(edges);

  g.features = Matrix(g.num_nodes, feature_dim);
  for (int v = 0; v < g.num_nodes; ++v) {
    for (int c = 0; c < feature_dim; ++c) {
      const double hot = (g.labels[v] % feature_dim == c) ? 1.0 : 0.0;
      g.features(v, c) = hot + jitter * rng.Normal();
    }
  }
  g.EnsureMasks();
  return g;
}

Graph GeneratePlantedCommunities(const PlantedCommunityParams& params, uint64_t seed) {
  const int n = params.num_nodes;
  const int classes = params.num_classes;
  const int comms = params.num_communities;
  if (n <= 0 || classes <= 0 || comms <= 0 || comms > n) {
    throw Error(ErrorCode::kConfig, "planted generator: invalid sizes");
  }
  Rng rng(seed);
  Graph g;
  g.num_nodes = n;
  g.num_classes = classes;
  g.labels.resize(n);

  std::vector<std::vector<int>> members(comms);
  for (int v = 0; v < n; ++v) {
    const int m = v % comms;
    members[m].push_back(v);
    const int dominant = m % classes;
    int y = dominant;
    if (classes > 1 && !rng.Bernoulli(params.purity)) {
      y = static_cast<int>(rng.UniformIndex(classes - 1));
      if (y >= dominant) ++y;
    }
    g.labels[v] = y;
  }

  std::vector<Edge> edges;
  for (const auto& block : members) {
    const double p = block.size() > 1
                         ? std::min(1.0, params.intra_degree /
                                             static_cast<double>(block.size() - 1))
                         : 0.0;
    SampleWithinBlock(block, p, rng, edges);
  }
  const auto inter_edges =
      static_cast<int64_t>(std::llround(params.inter_degree * n / 2.0));
  for (int64_t e = 0; e < inter_edges; ++e) {
    const int u = static_cast<int>(rng.UniformIndex(n));
    const int v = static_cast<int>(rng.UniformIndex(n));
    if (u % comms != v % comms) edges.emplace_back(u, v);
  }
  g.SetEdges(edges);

  const int f = params.feature_dim;
  g.features = Matrix(n, f);
  for (int v = 0; v < n; ++v) {
    const int topic_begin = (g.labels[v] * params.topic_size) % std::max(f, 1);
    for (int c = 0; c < f; ++c) {
      const int offset = (c - topic_begin + f) % f;
      const double rate = params.background_rate +
                          (offset < params.topic_size ? params.topic_rate : 0.0);
      g.features(v, c) = rng.Bernoulli(rate) ? 1.0 : 0.0;
    }
  }
  g.EnsureMasks();
  return g;
}

}  // namespace fgl
