#include "fgl/learn/train.h"

#include <cmath>

#include <spdlog/spdlog.h>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"

namespace fgl {
namespace {

void CheckGradient(const SgcModel& model, const std::vector<double>& grad) {
  for (size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw Error(ErrorCode::kNumeric, "non-finite gradient for " + model.ParameterName(i));
    }
  }
}

}  // namespace

int64_t BatchesPerEpoch(int64_t num_samples, int batch_size) {
  if (num_samples == 0) return 0;
  if (batch_size <= 0 || batch_size >= num_samples) return 1;
  return (num_samples + batch_size - 1) / batch_size;
}

TrainResult LocalTrain(SgcModel& model, OptimizerState& opt, const Dataset& data,
                       const TrainConfig& cfg, const TrainContext& ctx, uint64_t seed) {
  TrainResult result;
  result.num_samples = static_cast<int64_t>(data.train.size());
  if (result.num_samples == 0) {
    spdlog::warn("client has no training samples; skipping local training");
    return result;
  }
  opt.kind = cfg.optimizer;
  Regularization reg;
  reg.weight_decay = cfg.weight_decay;
  reg.prox_mu = ctx.prox_mu;
  reg.global_params = ctx.global_params;
  reg.proto_lambda = ctx.proto_lambda;
  reg.global_prototypes = ctx.global_prototypes;

  const int64_t batches = BatchesPerEpoch(result.num_samples, cfg.batch_size);
  const int64_t batch = batches == 1 ? result.num_samples : cfg.batch_size;
  Rng rng(seed);
  std::vector<int> order = data.train;
  std::vector<double> grad;
  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    if (batches > 1) rng.Shuffle(order);
    for (int64_t b = 0; b < batches; ++b) {
      const int64_t begin = b * batch;
      const int64_t end = std::min<int64_t>(begin + batch, result.num_samples);
      std::span<const int> rows(order.data() + begin, static_cast<size_t>(end - begin));
      result.loss_trace.push_back(LossAndGradient(model, data, rows, reg, &grad, ctx.dp));
      if (ctx.correction != nullptr) {
        for (size_t i = 0; i < grad.size(); ++i) grad[i] += (*ctx.correction)[i];
      }
      CheckGradient(model, grad);
      OptimizerStep(model.params(), grad, opt, cfg.lr);
      ++result.steps;
    }
  }
  return result;
}

}  // namespace fgl
