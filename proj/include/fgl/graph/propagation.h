#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fgl/common/matrix.h"
#include "fgl/graph/graph.h"

namespace fgl {

enum class NormalizationScheme { kSymmetric, kRowStochastic };

std::string_view NormalizationName(NormalizationScheme scheme);
NormalizationScheme ParseNormalization(std::string_view name);

// Sparse propagation operator built from A + I. Rows are CSR with the
// diagonal entry included in sorted column order.
struct NormalizedAdjacency {
  NormalizationScheme scheme = NormalizationScheme::kSymmetric;
  int num_nodes = 0;
  std::vector<int64_t> offsets{0};
  std::vector<int> columns;
  std::vector<double> values;

  // Stored entry (u, v), or 0 when absent.
  double At(int u, int v) const;
};

// Symmetric: 1/sqrt((d_u+1)(d_v+1)). Row-stochastic: 1/(d_u+1).
NormalizedAdjacency NormalizeAdjacency(const Graph& g, NormalizationScheme scheme);

// adj^k * x via k sparse-dense products.
Matrix Propagate(const NormalizedAdjacency& adj, const Matrix& x, int k);

}  // namespace fgl
