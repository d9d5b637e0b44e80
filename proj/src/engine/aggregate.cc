#include "fgl/engine/aggregate.h"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"

namespace fgl {
namespace {

const std::vector<double>& Field(const std::optional<std::vector<double>>& v, const char* name) {
  if (!v) throw Error(ErrorCode::kAggregation, std::string("message lacks ") + name);
  return *v;
}

void CheckSize(const std::vector<double>& v, size_t n, const char* name) {
  if (v.size() != n) {
    throw Error(ErrorCode::kAggregation, std::string(name) + " has " + std::to_string(v.size()) +
                                             " entries, expected " + std::to_string(n));
  }
}

bool Contributes(const Message& m) { return m.num_samples.value_or(0) > 0; }

}  // namespace

std::vector<int> SampleClients(int num_clients, double fraction, int round, uint64_t seed) {
  const int count = std::clamp(static_cast<int>(std::ceil(fraction * num_clients - 1e-9)), 1,
                               num_clients);
  std::vector<int> out;
  if (count == num_clients) {
    for (int k = 0; k < num_clients; ++k) out.push_back(k);
    return out;
  }
  Rng rng(DeriveSeed(seed, "sample", -1, round));
  auto perm = rng.Permutation(num_clients);
  for (int i = 0; i < count; ++i) out.push_back(static_cast<int>(perm[i]));
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::vector<double>> FedAvgAggregate(const std::vector<Message>& messages,
                                                   bool equal_weights) {
  double total = 0.0;
  size_t dim = 0;
  bool any = false;
  for (const auto& m : messages) {
    if (!Contributes(m)) continue;
    const auto& p = Field(m.params, "params");
    if (!any) dim = p.size();
    CheckSize(p, dim, "params");
    any = true;
    total += equal_weights ? 1.0 : static_cast<double>(*m.num_samples);
  }
  if (!any) {
    spdlog::warn("aggregation skipped: no sampled client reported training samples");
    return std::nullopt;
  }
  std::vector<double> out(dim, 0.0);
  for (const auto& m : messages) {
    if (!Contributes(m)) continue;
    const double w = (equal_weights ? 1.0 : static_cast<double>(*m.num_samples)) / total;
    for (size_t i = 0; i < dim; ++i) out[i] += w * (*m.params)[i];
  }
  return out;
}

ScaffoldClientDelta ScaffoldClientUpdate(const std::vector<double>& theta_global,
                                         const std::vector<double>& theta_local,
                                         const std::vector<double>& server_control,
                                         std::vector<double>& client_control, int64_t steps,
                                         double lr, bool pinned) {
  const size_t dim = theta_global.size();
  ScaffoldClientDelta out{std::vector<double>(dim), std::vector<double>(dim, 0.0)};
  for (size_t i = 0; i < dim; ++i) out.params_delta[i] = theta_local[i] - theta_global[i];
  if (pinned || steps == 0) return out;
  const double scale = 1.0 / (static_cast<double>(steps) * lr);
  for (size_t i = 0; i < dim; ++i) {
    const double updated =
        client_control[i] - server_control[i] + (theta_global[i] - theta_local[i]) * scale;
    out.control_delta[i] = updated - client_control[i];
    client_control[i] = updated;
  }
  return out;
}

void ScaffoldAggregate(const std::vector<Message>& messages, int num_clients, double server_lr,
                       std::vector<double>& theta, std::vector<double>& control) {
  std::vector<double> dtheta(theta.size(), 0.0);
  std::vector<double> dc(control.size(), 0.0);
  int contributing = 0;
  for (const auto& m : messages) {
    if (!Contributes(m)) continue;
    const auto& d = Field(m.params_delta, "params_delta");
    const auto& c = Field(m.control_delta, "control_delta");
    CheckSize(d, theta.size(), "params_delta");
    CheckSize(c, control.size(), "control_delta");
    for (size_t i = 0; i < d.size(); ++i) dtheta[i] += d[i];
    for (size_t i = 0; i < c.size(); ++i) dc[i] += c[i];
    ++contributing;
  }
  if (contributing == 0) {
    spdlog::warn("scaffold aggregation skipped: empty round");
    return;
  }
  const double step = server_lr / contributing;
  for (size_t i = 0; i < theta.size(); ++i) theta[i] += step * dtheta[i];
  for (size_t i = 0; i < control.size(); ++i) control[i] += dc[i] / num_clients;
}

PrototypeMap FedProtoAggregate(const std::vector<Message>& messages) {
  PrototypeMap out;
  for (const auto& m : messages) {
    if (!m.prototypes) continue;
    for (const auto& [cls, p] : *m.prototypes) {
      if (p.count <= 0) continue;
      auto& acc = out[cls];
      if (acc.center.empty()) acc.center.assign(p.center.size(), 0.0);
      CheckSize(p.center, acc.center.size(), "prototype");
      for (size_t i = 0; i < p.center.size(); ++i) {
        acc.center[i] += static_cast<double>(p.count) * p.center[i];
      }
      acc.count += p.count;
    }
  }
  for (auto& [cls, p] : out) {
    for (double& x : p.center) x /= static_cast<double>(p.count);
  }
  return out;
}

}  // namespace fgl
