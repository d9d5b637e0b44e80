#include "fgl/learn/dataset.h"

#include "fgl/common/error.h"

namespace fgl {
namespace {

std::vector<int> UsableRows(const Graph& g, const Mask& mask) {
  std::vector<int> rows;
  for (int v = 0; v < g.num_nodes; ++v) {
    if (!mask[v]) continue;
    if (!g.targets && g.labels[v] == kUnlabeled) continue;
    rows.push_back(v);
  }
  return rows;
}

}  // namespace

Dataset BuildNodeDataset(const Graph& g, int k, NormalizationScheme scheme) {
  Dataset d;
  d.x = Propagate(NormalizeAdjacency(g, scheme), g.features, k);
  d.labels = g.labels;
  if (g.targets) d.targets = *g.targets;
  d.num_classes = g.num_classes;
  d.train = UsableRows(g, g.train_mask);
  d.val = UsableRows(g, g.val_mask);
  d.test = UsableRows(g, g.test_mask);
  return d;
}

Dataset BuildGraphDataset(std::span<const Graph> graphs, std::span<const int> labels,
                          std::span<const double> targets, int num_classes, int k,
                          NormalizationScheme scheme, GraphSplit split) {
  const size_t n = graphs.size();
  if (labels.size() != n && targets.size() != n) {
    throw Error(ErrorCode::kShape, "graph dataset needs one label or target per graph");
  }
  Dataset d;
  const int dim = n == 0 ? 0 : graphs[0].feature_dim();
  d.x = Matrix(n, dim, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const Graph& g = graphs[i];
    if (g.feature_dim() != dim) throw Error(ErrorCode::kShape, "graphs disagree on feature_dim");
    if (g.num_nodes == 0) continue;
    Matrix h = Propagate(NormalizeAdjacency(g, scheme), g.features, k);
    auto row = d.x.row(i);
    for (int v = 0; v < g.num_nodes; ++v) {
      for (int c = 0; c < dim; ++c) row[c] += h(v, c);
    }
    for (int c = 0; c < dim; ++c) row[c] /= g.num_nodes;
  }
  if (targets.size() == n && n > 0) {
    d.targets.assign(targets.begin(), targets.end());
    d.labels.assign(n, kUnlabeled);
  } else {
    d.labels.assign(labels.begin(), labels.end());
  }
  d.num_classes = num_classes;
  d.train = std::move(split.train);
  d.val = std::move(split.val);
  d.test = std::move(split.test);
  return d;
}

}  // namespace fgl
