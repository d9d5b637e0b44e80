#include "fgl/common/rng.h"

#include <cmath>
#include <numeric>
#include <string>

namespace fgl {

uint64_t Fnv1a64(std::string_view text) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

uint64_t DeriveSeed(uint64_t master, std::string_view role, int64_t id,
                    int64_t round) {
  std::string key = std::to_string(master);
  key += '|';
  key += role;
  key += '|';
  key += id < 0 ? std::string("-") : std::to_string(id);
  key += '|';
  key += round < 0 ? std::string("-") : std::to_string(round);
  return Fnv1a64(key);
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

uint64_t Rng::UniformIndex(uint64_t bound) {
  // Rejection sampling on the largest multiple of bound below 2^64.
  const uint64_t limit = (~uint64_t{0}) - ((~uint64_t{0}) % bound + 1) % bound;
  uint64_t x = engine_();
  while (x > limit) x = engine_();
  return x % bound;
}

double Rng::Normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_normal_ = true;
  return radius * std::cos(angle);
}

double Rng::Laplace(double scale) {
  double u = Uniform() - 0.5;
  while (u == -0.5) u = Uniform() - 0.5;
  const double sign = u < 0 ? -1.0 : 1.0;
  return -scale * sign * std::log(1.0 - 2.0 * std::fabs(u));
}

double Rng::Gamma(double shape) {
  if (shape < 1.0) {
    double u = Uniform();
    while (u <= 0.0) u = Uniform();
    return Gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = Normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = Uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

std::vector<double> Rng::SymmetricDirichlet(double concentration, size_t k) {
  std::vector<double> draw(k);
  double total = 0.0;
  // Tiny concentrations can underflow every component; redraw in that case.
  while (total <= 0.0) {
    total = 0.0;
    for (auto& x : draw) {
      x = Gamma(concentration);
      total += x;
    }
  }
  for (auto& x : draw) x /= total;
  return draw;
}

std::vector<int64_t> Rng::Permutation(int64_t n) {
  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), int64_t{0});
  Shuffle(perm);
  return perm;
}

}  // namespace fgl
