#include "fgl/graph/graph.h"

#include <algorithm>
#include <string>

#include "fgl/common/error.h"

namespace fgl {

EdgeBuildStats Graph::SetEdges(std::span<const Edge> edges) {
  EdgeBuildStats stats;
  std::vector<Edge> undirected;
  undirected.reserve(edges.size());
  for (size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw Error(ErrorCode::kBounds,
                  "edge " + std::to_string(i + 1) + " (" + std::to_string(u) +
                      "," + std::to_string(v) + ") out of range for " +
                      std::to_string(num_nodes) + " nodes");
    }
    if (u == v) {
      ++stats.self_loops;
      continue;
    }
    undirected.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(undirected.begin(), undirected.end());
  auto last = std::unique(undirected.begin(), undirected.end());
  stats.duplicate_edges = std::distance(last, undirected.end());
  undirected.erase(last, undirected.end());

  std::vector<int64_t> degree(num_nodes, 0);
  for (auto [u, v] : undirected) {
    ++degree[u];
    ++degree[v];
  }
  offsets.assign(num_nodes + 1, 0);
  for (int v = 0; v < num_nodes; ++v) offsets[v + 1] = offsets[v] + degree[v];
  neighbors.assign(offsets.back(), 0);
  std::vector<int64_t> cursor(offsets.begin(), offsets.end() - 1);
  for (auto [u, v] : undirected) {
    neighbors[cursor[u]++] = v;
    neighbors[cursor[v]++] = u;
  }
  for (int v = 0; v < num_nodes; ++v) {
    std::sort(neighbors.begin() + offsets[v], neighbors.begin() + offsets[v + 1]);
  }
  return stats;
}

bool Graph::HasEdge(int u, int v) const {
  auto nbrs = Neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

int Graph::MaxDegree() const {
  int best = 0;
  for (int v = 0; v < num_nodes; ++v) best = std::max(best, degree(v));
  return best;
}

std::vector<Edge> Graph::EdgeList() const {
  std::vector<Edge> edges;
  edges.reserve(num_edges());
  for (int u = 0; u < num_nodes; ++u) {
    for (int v : Neighbors(u)) {
      if (u < v) edges.emplace_back(u, v);
    }
  }
  return edges;
}

void Graph::EnsureMasks() {
  if (labels.empty()) labels.assign(num_nodes, kUnlabeled);
  if (train_mask.empty()) train_mask.assign(num_nodes, 0);
  if (val_mask.empty()) val_mask.assign(num_nodes, 0);
  if (test_mask.empty()) test_mask.assign(num_nodes, 0);
}

std::vector<int> Graph::MaskIndices(const Mask& mask) const {
  std::vector<int> idx;
  for (int v = 0; v < static_cast<int>(mask.size()); ++v) {
    if (mask[v]) idx.push_back(v);
  }
  return idx;
}

void Graph::Validate() const {
  const auto n = static_cast<size_t>(num_nodes);
  if (offsets.size() != n + 1 || offsets.back() != static_cast<int64_t>(neighbors.size())) {
    throw Error(ErrorCode::kShape, "adjacency offsets do not match node count");
  }
  if (features.rows() != n) {
    throw Error(ErrorCode::kShape,
                "feature rows " + std::to_string(features.rows()) +
                    " != num_nodes " + std::to_string(num_nodes));
  }
  if (labels.size() != n) {
    throw Error(ErrorCode::kShape, "label count != num_nodes");
  }
  for (int y : labels) {
    if (y != kUnlabeled && (y < 0 || y >= num_classes)) {
      throw Error(ErrorCode::kFormat,
                  "label " + std::to_string(y) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
  }
  if (targets && targets->size() != n) {
    throw Error(ErrorCode::kShape, "target count != num_nodes");
  }
  for (const Mask* m : {&train_mask, &val_mask, &test_mask}) {
    if (m->size() != n) throw Error(ErrorCode::kShape, "mask length != num_nodes");
  }
  for (size_t v = 0; v < n; ++v) {
    if (train_mask[v] + val_mask[v] + test_mask[v] > 1) {
      throw Error(ErrorCode::kFormat,
                  "node " + std::to_string(v) + " is in more than one mask");
    }
  }
  for (int u = 0; u < num_nodes; ++u) {
    auto nbrs = Neighbors(u);
    for (size_t i = 0; i < nbrs.size(); ++i) {
      const int v = nbrs[i];
      if (v == u) throw Error(ErrorCode::kFormat, "self-loop stored");
      if (i > 0 && nbrs[i - 1] >= v) {
        throw Error(ErrorCode::kFormat, "neighbor list unsorted or duplicated");
      }
      if (!HasEdge(v, u)) throw Error(ErrorCode::kFormat, "adjacency not symmetric");
    }
  }
}

void GraphCollection::Validate() const {
  const size_t count = graphs.size();
  if (is_regression()) {
    if (graph_targets.size() != count || !graph_labels.empty()) {
      throw Error(ErrorCode::kShape, "graph target count != graph count");
    }
  } else if (graph_labels.size() != count) {
    throw Error(ErrorCode::kShape, "graph label count != graph count");
  }
  for (const auto& g : graphs) {
    if (g.feature_dim() != feature_dim()) {
      throw Error(ErrorCode::kShape, "graphs disagree on feature_dim");
    }
    g.Validate();
  }
}

}  // namespace fgl
