#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fgl {

// 64-bit FNV-1a over the bytes of `text`.
uint64_t Fnv1a64(std::string_view text);

// Seed for an independent random stream. The key is the string
// "master|role|id|round"; negative id/round are written as "-".
uint64_t DeriveSeed(uint64_t master, std::string_view role, int64_t id = -1,
                    int64_t round = -1);

// Deterministic random source. The engine is mt19937_64, whose output sequence
// is fixed by the standard; the distributions below are implemented here
// because the std:: distribution algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, bound); bound must be > 0.
  uint64_t UniformIndex(uint64_t bound);

  bool Bernoulli(double p) { return Uniform() < p; }

  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  // Laplace(0, scale) by inverse CDF.
  double Laplace(double scale);

  // Gamma(shape, 1), Marsaglia-Tsang with the shape<1 boost.
  double Gamma(double shape);

  // One draw from Dirichlet(concentration * 1_k).
  std::vector<double> SymmetricDirichlet(double concentration, size_t k);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformIndex(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Identity permutation of 0..n-1, shuffled.
  std::vector<int64_t> Permutation(int64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace fgl
