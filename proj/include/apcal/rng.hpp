// Deterministic random-number utilities. Seed derivation and the Gaussian
// sampler are implemented explicitly so that byte-identical results are
// reproducible across standard libraries and platforms.
#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace apcal {

/// One step of the splitmix64 sequence; advances state and returns the output.
std::uint64_t splitmix64_next(std::uint64_t& state);

/// Derive a decorrelated stream seed from a base seed and up to three indices
/// (e.g. bandwidth index, trial index, stream tag). Pure function.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a = 0,
                          std::uint64_t b = 0, std::uint64_t c = 0);

/// Gaussian / uniform sampler over a mersenne-twister core. The normal
/// variates use an explicit polar Box-Muller transform instead of
/// std::normal_distribution, whose output sequence is implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Real N(0, variance).
  double gaussian(double variance);
  /// Circularly-symmetric complex normal with E|z|^2 = total_variance
  /// (each quadrature carries half of it).
  std::complex<double> complex_gaussian(double total_variance);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;  // second Box-Muller output, unit variance
};

}  // namespace apcal
