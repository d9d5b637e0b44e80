#include "fgl/graph/propagation.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgl/common/error.h"

namespace fgl {

std::string_view NormalizationName(NormalizationScheme scheme) {
  return scheme == NormalizationScheme::kSymmetric ? "symmetric" : "row_stochastic";
}

NormalizationScheme ParseNormalization(std::string_view name) {
  if (name == "symmetric") return NormalizationScheme::kSymmetric;
  if (name == "row_stochastic") return NormalizationScheme::kRowStochastic;
  throw Error(ErrorCode::kConfig, "unknown normalization '" + std::string(name) + "'");
}

double NormalizedAdjacency::At(int u, int v) const {
  auto begin = columns.begin() + offsets[u];
  auto end = columns.begin() + offsets[u + 1];
  auto it = std::lower_bound(begin, end, v);
  if (it == end || *it != v) return 0.0;
  return values[std::distance(columns.begin(), it)];
}

NormalizedAdjacency NormalizeAdjacency(const Graph& g, NormalizationScheme scheme) {
  NormalizedAdjacency adj;
  adj.scheme = scheme;
  adj.num_nodes = g.num_nodes;
  adj.offsets.assign(g.num_nodes + 1, 0);
  adj.columns.reserve(g.neighbors.size() + g.num_nodes);
  adj.values.reserve(g.neighbors.size() + g.num_nodes);

  std::vector<double> inv_sqrt(g.num_nodes);
  for (int v = 0; v < g.num_nodes; ++v) {
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  }
  auto weight = [&](int u, int v) {
    if (scheme == NormalizationScheme::kSymmetric) return inv_sqrt[u] * inv_sqrt[v];
    return 1.0 / static_cast<double>(g.degree(u) + 1);
  };

  for (int u = 0; u < g.num_nodes; ++u) {
    bool diagonal_done = false;
    for (int v : g.Neighbors(u)) {
      if (!diagonal_done && v > u) {
        adj.columns.push_back(u);
        adj.values.push_back(weight(u, u));
        diagonal_done = true;
      }
      adj.columns.push_back(v);
      adj.values.push_back(weight(u, v));
    }
    if (!diagonal_done) {
      adj.columns.push_back(u);
      adj.values.push_back(weight(u, u));
    }
    adj.offsets[u + 1] = static_cast<int64_t>(adj.columns.size());
  }
  return adj;
}

Matrix Propagate(const NormalizedAdjacency& adj, const Matrix& x, int k) {
  if (x.rows() != static_cast<size_t>(adj.num_nodes)) {
    throw Error(ErrorCode::kShape, "propagate: matrix has " + std::to_string(x.rows()) +
                                       " rows, adjacency has " +
                                       std::to_string(adj.num_nodes));
  }
  if (k < 0) throw Error(ErrorCode::kConfig, "propagate: negative step count");
  Matrix current = x;
  Matrix next(x.rows(), x.cols());
  for (int step = 0; step < k; ++step) {
    std::fill(next.data().begin(), next.data().end(), 0.0);
    for (int u = 0; u < adj.num_nodes; ++u) {
      auto out = next.row(u);
      for (int64_t e = adj.offsets[u]; e < adj.offsets[u + 1]; ++e) {
        const double w = adj.values[e];
        auto in = current.row(adj.columns[e]);
        for (size_t c = 0; c < out.size(); ++c) out[c] += w * in[c];
      }
    }
    std::swap(current, next);
  }
  return current;
}

}  // namespace fgl
