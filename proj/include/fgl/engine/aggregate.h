#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fgl/engine/message.h"
#include "fgl/learn/model.h"

namespace fgl {

// ceil(fraction * K) distinct clients from a stream seeded by
// DeriveSeed(seed, "sample", -, round), sorted ascending.
std::vector<int> SampleClients(int num_clients, double fraction, int round, uint64_t seed);

// sum_k (D_k / D) params_k over messages with D_k > 0, or the plain mean of
// those messages with `equal_weights`. Empty (with a warning) when no
// message carries samples.
std::optional<std::vector<double>> FedAvgAggregate(const std::vector<Message>& messages,
                                                   bool equal_weights = false);

struct ScaffoldClientDelta {
  std::vector<double> params_delta;   // theta_i - theta_global
  std::vector<double> control_delta;  // c_i+ - c_i
};

// Client variate update after `steps` local steps at rate `lr`:
// c_i+ = c_i - c + (theta_global - theta_i) / (steps * lr). Updates
// `client_control` in place unless `pinned`.
ScaffoldClientDelta ScaffoldClientUpdate(const std::vector<double>& theta_global,
                                         const std::vector<double>& theta_local,
                                         const std::vector<double>& server_control,
                                         std::vector<double>& client_control, int64_t steps,
                                         double lr, bool pinned);

// theta += (server_lr / |S|) sum dtheta_k and c += (1 / K) sum dc_k over the
// messages with D_k > 0. No-op with a warning when there are none.
void ScaffoldAggregate(const std::vector<Message>& messages, int num_clients, double server_lr,
                       std::vector<double>& theta, std::vector<double>& control);

// Count-weighted mean prototype per class over the clients reporting it.
PrototypeMap FedProtoAggregate(const std::vector<Message>& messages);

}  // namespace fgl
