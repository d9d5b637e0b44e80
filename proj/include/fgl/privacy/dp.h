#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fgl/common/rng.h"

namespace fgl {

enum class SensitivityRule { kNodeLevel, kGraphSample };

std::string_view SensitivityRuleName(SensitivityRule rule);
SensitivityRule ParseSensitivityRule(std::string_view name);

struct DpConfig {
  double clip_norm = 1.0;
  double epsilon = 8.0;
  double delta = 1e-5;
  std::vector<double> alpha_grid{1.5, 2, 3, 4, 8, 16, 32, 64};
  SensitivityRule rule = SensitivityRule::kNodeLevel;
  // Fixed noise scale instead of calibration; 0 disables noise entirely.
  std::optional<double> sigma_override;

  // Throws kConfig on C <= 0, epsilon <= 0, delta outside (0,1) or alpha <= 1.
  void Validate() const;
  bool operator==(const DpConfig&) const = default;
};

double L2Norm(std::span<const double> w);

// w * min(1, C / ||w||).
std::vector<double> ClipVector(std::span<const double> w, double clip_norm);

// Sensitivity of the clipped batch gradient of a one-layer graph model when
// one node (and its edges) is added or removed.
double NodeSensitivity(int d_max, double clip_norm);

std::vector<double> GaussianPerturb(std::span<const double> v, double sigma, uint64_t seed);
void AddGaussianNoise(std::span<double> v, double sigma, Rng& rng);

// RDP cost of one Gaussian release: alpha * delta2^2 / (2 sigma^2).
double RdpOfGaussian(double alpha, double delta2, double sigma);

// (alpha, gamma)-RDP implies (gamma + log(1/delta)/(alpha-1), delta)-DP.
double RdpToDp(double alpha, double gamma_total, double delta);

struct Calibration {
  double sigma = 0.0;
  double alpha = 0.0;
  double gamma_per_release = 0.0;
};

// Smallest sigma over the grid such that `releases` compositions meet
// (epsilon, delta). Throws kInfeasibleBudget when no order leaves budget.
Calibration CalibrateSigma(double epsilon, double delta, int64_t releases,
                           std::span<const double> alpha_grid, double delta2);

class RdpAccountant {
 public:
  explicit RdpAccountant(double alpha) : alpha_(alpha) {}

  void Compose(double gamma);
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  int64_t steps() const { return steps_; }
  double Epsilon(double delta) const { return RdpToDp(alpha_, gamma_, delta); }

 private:
  double alpha_;
  double gamma_ = 0.0;
  int64_t steps_ = 0;
};

// Per-client Gaussian mechanism over clipped gradient sums. Owns the noise
// stream and one accountant per grid order.
class DpMechanism {
 public:
  // `propagation_steps` is checked against the one-layer requirement of the
  // node-level rule; `d_max` is the client's maximum degree.
  DpMechanism(const DpConfig& config, int d_max, int propagation_steps,
              int64_t planned_releases, uint64_t seed);

  // Adds N(0, sigma^2 I) to `gradient_sum` and advances the accountants.
  void Release(std::span<double> gradient_sum);

  double clip_norm() const { return config_.clip_norm; }
  double sigma() const { return sigma_; }
  double sensitivity() const { return delta2_; }
  int d_max() const { return d_max_; }
  double alpha() const { return alpha_; }
  int64_t releases() const { return releases_; }

  // Tightest epsilon over the grid; empty when sigma is 0 (no guarantee).
  std::optional<double> EpsilonAchieved() const;

 private:
  DpConfig config_;
  int d_max_;
  double delta2_;
  double sigma_ = 0.0;
  double alpha_ = 0.0;
  int64_t releases_ = 0;
  Rng rng_;
  std::vector<RdpAccountant> accountants_;
};

}  // namespace fgl
