#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fgl/common/matrix.h"
#include "fgl/learn/dataset.h"

namespace fgl {

class DpMechanism;

// Linear classifier over propagated features. Parameters are stored flat as
// W (in_dim x out_dim, row-major) followed by b (out_dim).
class SgcModel {
 public:
  SgcModel() = default;
  SgcModel(int in_dim, int out_dim)
      : in_dim_(in_dim), out_dim_(out_dim),
        params_(static_cast<size_t>(in_dim + 1) * out_dim, 0.0) {}

  // Glorot-uniform W, zero b.
  static SgcModel Glorot(int in_dim, int out_dim, uint64_t seed);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  size_t num_weights() const { return static_cast<size_t>(in_dim_) * out_dim_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  double& w(int i, int j) { return params_[static_cast<size_t>(i) * out_dim_ + j]; }
  double w(int i, int j) const { return params_[static_cast<size_t>(i) * out_dim_ + j]; }
  double& b(int j) { return params_[num_weights() + j]; }
  double b(int j) const { return params_[num_weights() + j]; }

  // "W[i,j]" or "b[j]" for flat index `index`.
  std::string ParameterName(size_t index) const;

  // logits[r] = x[rows[r]] * W + b.
  Matrix Forward(const Matrix& x, std::span<const int> rows) const;

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  std::vector<double> params_;
};

struct Prototype {
  std::vector<double> center;
  int64_t count = 0;

  bool operator==(const Prototype&) const = default;
};

using PrototypeMap = std::map<int, Prototype>;

struct Regularization {
  double weight_decay = 0.0;
  double prox_mu = 0.0;
  const std::vector<double>* global_params = nullptr;
  double proto_lambda = 0.0;
  const PrototypeMap* global_prototypes = nullptr;
};

// Mean data loss over `rows` plus (wd/2)|W|^2 + (mu/2)|theta - theta_g|^2 +
// lambda * sum_c (n_c/n) |p_c - P_c|^2, with p_c the batch mean logit of
// class c. Writes the exact gradient to `grad` when non-null. With `dp`, each
// row's data gradient is clipped before summation and the sum is released
// through the mechanism.
double LossAndGradient(const SgcModel& model, const Dataset& data, std::span<const int> rows,
                       const Regularization& reg, std::vector<double>* grad,
                       DpMechanism* dp = nullptr);

// Mean logit vector per class over the labeled `rows`.
PrototypeMap ComputePrototypes(const SgcModel& model, const Dataset& data,
                               std::span<const int> rows);

}  // namespace fgl
