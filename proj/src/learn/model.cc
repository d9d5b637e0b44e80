#include "fgl/learn/model.h"

#include <algorithm>
#include <cmath>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"
#include "fgl/privacy/dp.h"

namespace fgl {

SgcModel SgcModel::Glorot(int in_dim, int out_dim, uint64_t seed) {
  SgcModel model(in_dim, out_dim);
  Rng rng(seed);
  const double limit = std::sqrt(6.0 / (in_dim + out_dim));
  for (size_t i = 0; i < model.num_weights(); ++i) model.params_[i] = rng.Uniform(-limit, limit);
  return model;
}

std::string SgcModel::ParameterName(size_t index) const {
  if (index < num_weights()) {
    return "W[" + std::to_string(index / out_dim_) + "," + std::to_string(index % out_dim_) +
           "]";
  }
  return "b[" + std::to_string(index - num_weights()) + "]";
}

Matrix SgcModel::Forward(const Matrix& x, std::span<const int> rows) const {
  if (static_cast<int>(x.cols()) != in_dim_) {
    throw Error(ErrorCode::kShape, "input has " + std::to_string(x.cols()) +
                                       " features, model expects " + std::to_string(in_dim_));
  }
  Matrix out(rows.size(), out_dim_);
  for (size_t r = 0; r < rows.size(); ++r) {
    auto z = out.row(r);
    for (int k = 0; k < out_dim_; ++k) z[k] = b(k);
    auto xr = x.row(rows[r]);
    for (int j = 0; j < in_dim_; ++j) {
      const double xj = xr[j];
      if (xj == 0.0) continue;
      const double* wj = &params_[static_cast<size_t>(j) * out_dim_];
      for (int k = 0; k < out_dim_; ++k) z[k] += xj * wj[k];
    }
  }
  return out;
}

double LossAndGradient(const SgcModel& model, const Dataset& data, std::span<const int> rows,
                       const Regularization& reg, std::vector<double>* grad,
                       DpMechanism* dp) {
  if (rows.empty()) throw Error(ErrorCode::kContractViolation, "loss over an empty batch");
  const int f = model.in_dim();
  const int c = model.out_dim();
  const double n = static_cast<double>(rows.size());
  const bool regression = data.regression();
  const Matrix logits = model.Forward(data.x, rows);

  for (int row : rows) {
    if (!regression && data.labels[row] == kUnlabeled) {
      throw Error(ErrorCode::kContractViolation,
                  "training row " + std::to_string(row) + " is unlabeled");
    }
  }

  // Batch class means of the logits, for classes with a global prototype.
  const bool use_protos =
      !regression && reg.proto_lambda > 0.0 && reg.global_prototypes != nullptr;
  std::vector<std::vector<double>> proto_diff(c);
  std::vector<int> class_count(c, 0);
  double loss_proto = 0.0;
  if (use_protos) {
    std::vector<std::vector<double>> mean(c);
    for (size_t r = 0; r < rows.size(); ++r) {
      const int y = data.labels[rows[r]];
      if (!reg.global_prototypes->count(y)) continue;
      if (mean[y].empty()) mean[y].assign(c, 0.0);
      for (int k = 0; k < c; ++k) mean[y][k] += logits(r, k);
      ++class_count[y];
    }
    for (const auto& [y, proto] : *reg.global_prototypes) {
      if (y < 0 || y >= c || class_count[y] == 0) continue;
      if (static_cast<int>(proto.center.size()) != c) {
        throw Error(ErrorCode::kShape, "prototype dimension mismatch");
      }
      proto_diff[y].resize(c);
      double sq = 0.0;
      for (int k = 0; k < c; ++k) {
        proto_diff[y][k] = mean[y][k] / class_count[y] - proto.center[k];
        sq += proto_diff[y][k] * proto_diff[y][k];
      }
      loss_proto += reg.proto_lambda * (class_count[y] / n) * sq;
    }
  }

  const size_t num_params = model.params().size();
  std::vector<double> sum(grad != nullptr ? num_params : 0, 0.0);
  std::vector<double> dz(c);
  std::vector<double> sample(dp != nullptr ? num_params : 0);
  double loss_data = 0.0;
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto z = logits.row(r);
    if (regression) {
      const double diff = z[0] - data.targets[rows[r]];
      loss_data += diff * diff;
      dz[0] = 2.0 * diff;
    } else {
      const int y = data.labels[rows[r]];
      const double m = *std::max_element(z.begin(), z.end());
      double denom = 0.0;
      for (int k = 0; k < c; ++k) denom += std::exp(z[k] - m);
      loss_data += m + std::log(denom) - z[y];
      for (int k = 0; k < c; ++k) dz[k] = std::exp(z[k] - m) / denom;
      dz[y] -= 1.0;
      if (use_protos && !proto_diff[y].empty()) {
        for (int k = 0; k < c; ++k) dz[k] += 2.0 * reg.proto_lambda * proto_diff[y][k];
      }
    }
    if (grad == nullptr) continue;

    const auto x = data.x.row(rows[r]);
    if (dp != nullptr) {
      for (int j = 0; j < f; ++j) {
        for (int k = 0; k < c; ++k) sample[static_cast<size_t>(j) * c + k] = x[j] * dz[k];
      }
      for (int k = 0; k < c; ++k) sample[model.num_weights() + k] = dz[k];
      const auto clipped = ClipVector(sample, dp->clip_norm());
      for (size_t i = 0; i < num_params; ++i) sum[i] += clipped[i];
    } else {
      for (int j = 0; j < f; ++j) {
        double* g = &sum[static_cast<size_t>(j) * c];
        for (int k = 0; k < c; ++k) g[k] += x[j] * dz[k];
      }
      for (int k = 0; k < c; ++k) sum[model.num_weights() + k] += dz[k];
    }
  }

  double loss = loss_data / n + loss_proto;
  if (grad != nullptr) {
    if (dp != nullptr) dp->Release(sum);
    grad->assign(num_params, 0.0);
    for (size_t i = 0; i < num_params; ++i) (*grad)[i] = sum[i] / n;
  }

  const auto& theta = model.params();
  if (reg.weight_decay > 0.0) {
    double sq = 0.0;
    for (size_t i = 0; i < model.num_weights(); ++i) {
      sq += theta[i] * theta[i];
      if (grad != nullptr) (*grad)[i] += reg.weight_decay * theta[i];
    }
    loss += 0.5 * reg.weight_decay * sq;
  }
  if (reg.prox_mu > 0.0 && reg.global_params != nullptr) {
    const auto& global = *reg.global_params;
    double sq = 0.0;
    for (size_t i = 0; i < num_params; ++i) {
      const double d = theta[i] - global[i];
      sq += d * d;
      if (grad != nullptr) (*grad)[i] += reg.prox_mu * d;
    }
    loss += 0.5 * reg.prox_mu * sq;
  }
  return loss;
}

PrototypeMap ComputePrototypes(const SgcModel& model, const Dataset& data,
                               std::span<const int> rows) {
  PrototypeMap out;
  if (data.regression()) return out;
  const Matrix logits = model.Forward(data.x, rows);
  for (size_t r = 0; r < rows.size(); ++r) {
    const int y = data.labels[rows[r]];
    if (y == kUnlabeled) continue;
    auto& p = out[y];
    if (p.center.empty()) p.center.assign(model.out_dim(), 0.0);
    for (int k = 0; k < model.out_dim(); ++k) p.center[k] += logits(r, k);
    ++p.count;
  }
  for (auto& [y, p] : out) {
    for (double& v : p.center) v /= static_cast<double>(p.count);
  }
  return out;
}

}  // namespace fgl
