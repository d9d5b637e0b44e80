#pragma once

#include <cstdint>
#include <vector>

#include "fgl/graph/propagation.h"
#include "fgl/learn/dataset.h"
#include "fgl/learn/model.h"
#include "fgl/learn/optimizer.h"

namespace fgl {

class DpMechanism;

struct TrainConfig {
  int local_epochs = 3;
  int batch_size = 0;  // 0 trains full-batch
  double lr = 1e-2;
  double weight_decay = 5e-4;
  double prox_mu = 0.01;
  double proto_lambda = 1.0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  int k = 2;  // propagation steps
  NormalizationScheme normalization = NormalizationScheme::kSymmetric;

  bool operator==(const TrainConfig&) const = default;
};

// Algorithm-specific inputs to one call of LocalTrain.
struct TrainContext {
  const std::vector<double>* global_params = nullptr;  // proximal anchor
  double prox_mu = 0.0;
  const PrototypeMap* global_prototypes = nullptr;
  double proto_lambda = 0.0;
  // Added to every raw gradient before the optimizer (Scaffold's c - c_i).
  const std::vector<double>* correction = nullptr;
  DpMechanism* dp = nullptr;
};

struct TrainResult {
  int64_t num_samples = 0;
  int64_t steps = 0;
  std::vector<double> loss_trace;  // loss before each step
};

// Batches per epoch for `num_samples` training rows.
int64_t BatchesPerEpoch(int64_t num_samples, int batch_size);

// Runs cfg.local_epochs epochs of mini-batch steps over data.train. Batch
// order is shuffled from `seed` each epoch; a single full batch is not
// shuffled. A client with no training rows returns num_samples 0.
TrainResult LocalTrain(SgcModel& model, OptimizerState& opt, const Dataset& data,
                       const TrainConfig& cfg, const TrainContext& ctx, uint64_t seed);

}  // namespace fgl
