#include "apcal/rng.hpp"

#include <cmath>

#include "apcal/constants.hpp"

namespace apcal {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  // Chain the indices through the mixer so that nearby (base, a, b, c)
  // tuples land on statistically unrelated seeds.
  std::uint64_t s = base;
  std::uint64_t out = splitmix64_next(s);
  s ^= a + 0x9e3779b97f4a7c15ULL;
  out ^= splitmix64_next(s);
  s ^= b + 0xbf58476d1ce4e5b9ULL;
  out ^= splitmix64_next(s);
  s ^= c + 0x94d049bb133111ebULL;
  out ^= splitmix64_next(s);
  return out;
}

double RandomStream::uniform() {
  // 53 random bits -> [0, 1) with full double resolution.
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RandomStream::gaussian(double variance) {
  if (have_spare_) {
    have_spare_ = false;
    return spare_ * std::sqrt(variance);
  }
  // Polar Box-Muller on explicitly constructed uniforms; u1 is kept away
  // from zero so the log stays finite.
  const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = kTwoPi * u2;
  spare_ = r * std::sin(angle);
  have_spare_ = true;
  return r * std::cos(angle) * std::sqrt(variance);
}

std::complex<double> RandomStream::complex_gaussian(double total_variance) {
  // One polar draw yields both quadratures with E|z|^2 = total_variance.
  const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-std::log(u1) * total_variance);
  const double angle = kTwoPi * u2;
  return {r * std::cos(angle), r * std::sin(angle)};
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  // Rejection-free modulo is fine here: n is tiny compared to 2^64, so the
  // bias is far below anything observable in these experiments.
  return eng_() % n;
}

}  // namespace apcal
