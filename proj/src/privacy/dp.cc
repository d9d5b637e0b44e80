#include "fgl/privacy/dp.h"

#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "fgl/common/error.h"

namespace fgl {

std::string_view SensitivityRuleName(SensitivityRule rule) {
  return rule == SensitivityRule::kNodeLevel ? "node_level" : "graph_sample";
}

SensitivityRule ParseSensitivityRule(std::string_view name) {
  if (name == "node_level") return SensitivityRule::kNodeLevel;
  if (name == "graph_sample") return SensitivityRule::kGraphSample;
  throw Error(ErrorCode::kConfig, "unknown sensitivity rule '" + std::string(name) + "'");
}

void DpConfig::Validate() const {
  if (!(clip_norm > 0)) throw Error(ErrorCode::kConfig, "dp.clip_norm must be > 0");
  if (!(epsilon > 0)) throw Error(ErrorCode::kConfig, "dp.epsilon must be > 0");
  if (!(delta > 0 && delta < 1)) throw Error(ErrorCode::kConfig, "dp.delta must be in (0,1)");
  if (alpha_grid.empty()) throw Error(ErrorCode::kConfig, "dp.alpha_grid is empty");
  for (double a : alpha_grid) {
    if (!(a > 1)) throw Error(ErrorCode::kConfig, "dp.alpha_grid entries must be > 1");
  }
  if (sigma_override && !(*sigma_override >= 0)) {
    throw Error(ErrorCode::kConfig, "dp.sigma_override must be >= 0");
  }
}

double L2Norm(std::span<const double> w) {
  double s = 0.0;
  for (double x : w) s += x * x;
  return std::sqrt(s);
}

std::vector<double> ClipVector(std::span<const double> w, double clip_norm) {
  std::vector<double> out(w.begin(), w.end());
  const double norm = L2Norm(w);
  if (norm <= clip_norm) return out;
  const double scale = clip_norm / norm;
  for (double& x : out) x *= scale;
  return out;
}

double NodeSensitivity(int d_max, double clip_norm) {
  return 2.0 * (d_max + 1) * clip_norm;
}

void AddGaussianNoise(std::span<double> v, double sigma, Rng& rng) {
  if (sigma == 0.0) return;
  for (double& x : v) x += sigma * rng.Normal();
}

std::vector<double> GaussianPerturb(std::span<const double> v, double sigma, uint64_t seed) {
  std::vector<double> out(v.begin(), v.end());
  Rng rng(seed);
  AddGaussianNoise(out, sigma, rng);
  return out;
}

double RdpOfGaussian(double alpha, double delta2, double sigma) {
  if (sigma == 0.0) {
    throw Error(ErrorCode::kInfiniteBudget, "Gaussian mechanism with sigma = 0 has no RDP bound");
  }
  return alpha * delta2 * delta2 / (2.0 * sigma * sigma);
}

double RdpToDp(double alpha, double gamma_total, double delta) {
  return gamma_total + std::log(1.0 / delta) / (alpha - 1.0);
}

Calibration CalibrateSigma(double epsilon, double delta, int64_t releases,
                           std::span<const double> alpha_grid, double delta2) {
  if (releases < 1) throw Error(ErrorCode::kConfig, "calibration needs >= 1 release");
  Calibration best;
  bool found = false;
  for (double alpha : alpha_grid) {
    const double residual = epsilon - std::log(1.0 / delta) / (alpha - 1.0);
    if (!(residual > 0)) continue;
    const double gamma = residual / static_cast<double>(releases);
    const double sigma = delta2 * std::sqrt(alpha / (2.0 * gamma));
    if (!found || sigma < best.sigma) {
      best = {sigma, alpha, gamma};
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::kInfeasibleBudget,
                fmt::format("epsilon {} with delta {} is below log(1/delta)/(alpha-1) for "
                            "every alpha in [{}]",
                            epsilon, delta, fmt::join(alpha_grid, ", ")));
  }
  return best;
}

void RdpAccountant::Compose(double gamma) {
  gamma_ += gamma;
  ++steps_;
}

DpMechanism::DpMechanism(const DpConfig& config, int d_max, int propagation_steps,
                         int64_t planned_releases, uint64_t seed)
    : config_(config), d_max_(d_max), rng_(seed) {
  config_.Validate();
  if (config_.rule == SensitivityRule::kNodeLevel && propagation_steps > 1) {
    throw Error(ErrorCode::kPrivacyContract,
                "node-level DP requires a one-layer model (k <= 1), got k = " +
                    std::to_string(propagation_steps));
  }
  delta2_ = config_.rule == SensitivityRule::kNodeLevel
                ? NodeSensitivity(d_max, config_.clip_norm)
                : config_.clip_norm;
  if (config_.sigma_override) {
    sigma_ = *config_.sigma_override;
  } else {
    auto cal = CalibrateSigma(config_.epsilon, config_.delta, planned_releases,
                              config_.alpha_grid, delta2_);
    sigma_ = cal.sigma;
    alpha_ = cal.alpha;
  }
  for (double a : config_.alpha_grid) accountants_.emplace_back(a);
}

void DpMechanism::Release(std::span<double> gradient_sum) {
  AddGaussianNoise(gradient_sum, sigma_, rng_);
  ++releases_;
  if (sigma_ == 0.0) return;
  for (auto& acc : accountants_) acc.Compose(RdpOfGaussian(acc.alpha(), delta2_, sigma_));
}

std::optional<double> DpMechanism::EpsilonAchieved() const {
  if (sigma_ == 0.0 && delta2_ > 0.0) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& acc : accountants_) {
    // The calibrated order reproduces the target; other orders can only tie or exceed it.
    const double eps = acc.Epsilon(config_.delta);
    if (alpha_ > 0.0 && acc.alpha() == alpha_) return eps;
    best = std::min(best, eps);
  }
  return best;
}

}  // namespace fgl
