#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fgl {

enum class OptimizerKind { kAdam, kSgd };

std::string_view OptimizerName(OptimizerKind kind);
OptimizerKind ParseOptimizer(std::string_view name);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  std::vector<double> m;
  std::vector<double> v;
  int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Throws kNumeric naming the first non-finite
// gradient entry.
void AdamStep(std::span<double> params, std::span<const double> grads, OptimizerState& state,
              double lr);

// Adam or plain gradient descent depending on state.kind.
void OptimizerStep(std::span<double> params, std::span<const double> grads,
                   OptimizerState& state, double lr);

}  // namespace fgl
