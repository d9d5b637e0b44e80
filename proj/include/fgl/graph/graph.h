#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fgl/common/matrix.h"

namespace fgl {

using Edge = std::pair<int, int>;
using Mask = std::vector<uint8_t>;

inline constexpr int kUnlabeled = -1;

struct EdgeBuildStats {
  int64_t duplicate_edges = 0;
  int64_t self_loops = 0;

  int64_t warnings() const { return duplicate_edges + self_loops; }
};

// Undirected graph with dense node features. Adjacency is CSR with sorted
// neighbor lists; both directions of every edge are stored, self-loops never.
struct Graph {
  int num_nodes = 0;
  std::vector<int64_t> offsets{0};
  std::vector<int> neighbors;
  Matrix features;
  std::vector<int> labels;
  int num_classes = 0;
  std::optional<std::vector<double>> targets;
  Mask train_mask;
  Mask val_mask;
  Mask test_mask;

  // Replaces the topology with the undirected closure of `edges`. Self-loops
  // and repeated pairs (in either orientation) are dropped and counted.
  // Throws kBounds naming the 1-based position of an out-of-range edge.
  EdgeBuildStats SetEdges(std::span<const Edge> edges);

  int64_t num_edges() const {
    return static_cast<int64_t>(neighbors.size()) / 2;
  }
  int feature_dim() const { return static_cast<int>(features.cols()); }
  int degree(int v) const {
    return static_cast<int>(offsets[v + 1] - offsets[v]);
  }
  std::span<const int> Neighbors(int v) const {
    return {neighbors.data() + offsets[v],
            static_cast<size_t>(offsets[v + 1] - offsets[v])};
  }
  bool HasEdge(int u, int v) const;
  int MaxDegree() const;

  // Each undirected edge once, as (u, v) with u < v, in CSR order.
  std::vector<Edge> EdgeList() const;

  // Sizes masks to num_nodes (all false) and labels to unlabeled if empty.
  void EnsureMasks();

  std::vector<int> MaskIndices(const Mask& mask) const;

  // Throws kShape/kFormat when any structural invariant is broken.
  void Validate() const;
};

struct GraphCollection {
  std::vector<Graph> graphs;
  std::vector<int> graph_labels;
  std::vector<double> graph_targets;
  int num_classes = 0;

  bool is_regression() const { return !graph_targets.empty(); }
  size_t size() const { return graphs.size(); }
  int feature_dim() const {
    return graphs.empty() ? 0 : graphs.front().feature_dim();
  }

  void Validate() const;
};

// Subgraph of a larger graph with the mapping back to the parent's node ids.
struct ClientSubgraph {
  Graph graph;
  std::vector<int> global_ids;
};

}  // namespace fgl
