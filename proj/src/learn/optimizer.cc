#include "fgl/learn/optimizer.h"

#include <cmath>
#include <string>

#include "fgl/common/error.h"

namespace fgl {
namespace {

void CheckFinite(std::span<const double> grads) {
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw Error(ErrorCode::kNumeric, "non-finite gradient at params[" + std::to_string(i) +
                                           "] = " + std::to_string(grads[i]));
    }
  }
}

}  // namespace

std::string_view OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind ParseOptimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw Error(ErrorCode::kConfig, "unknown optimizer '" + std::string(name) + "'");
}

void AdamStep(std::span<double> params, std::span<const double> grads, OptimizerState& state,
              double lr) {
  if (params.size() != grads.size()) throw Error(ErrorCode::kShape, "gradient size mismatch");
  CheckFinite(grads);
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

void OptimizerStep(std::span<double> params, std::span<const double> grads,
                   OptimizerState& state, double lr) {
  if (state.kind == OptimizerKind::kAdam) {
    AdamStep(params, grads, state, lr);
    return;
  }
  if (params.size() != grads.size()) throw Error(ErrorCode::kShape, "gradient size mismatch");
  CheckFinite(grads);
  ++state.t;
  for (size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

}  // namespace fgl
