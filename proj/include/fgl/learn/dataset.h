#pragma once

#include <span>
#include <vector>

#include "fgl/common/matrix.h"
#include "fgl/graph/graph.h"
#include "fgl/graph/propagation.h"

namespace fgl {

// Samples as rows of precomputed model inputs. Node tasks use propagated
// node features; graph tasks use the mean of each graph's propagated
// features. Built once per client; perturb the source data before building.
struct Dataset {
  Matrix x;
  std::vector<int> labels;      // classification, kUnlabeled allowed
  std::vector<double> targets;  // regression
  int num_classes = 0;
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;

  bool regression() const { return !targets.empty(); }
  int num_outputs() const { return regression() ? 1 : num_classes; }
  int num_samples() const { return static_cast<int>(x.rows()); }
  int feature_dim() const { return static_cast<int>(x.cols()); }
};

// Node-level dataset. Split rows are the mask members that carry a label
// (or every masked node for regression targets).
Dataset BuildNodeDataset(const Graph& g, int k, NormalizationScheme scheme);

struct GraphSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Graph-level dataset over `graphs`; exactly one of labels/targets is used.
Dataset BuildGraphDataset(std::span<const Graph> graphs, std::span<const int> labels,
                          std::span<const double> targets, int num_classes, int k,
                          NormalizationScheme scheme, GraphSplit split);

}  // namespace fgl
