#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "apcal/constants.hpp"
#include "apcal/errors.hpp"
#include "apcal/numeric.hpp"
#include "apcal/ofdm.hpp"

using namespace apcal;
using cplx = std::complex<double>;

namespace {
OfdmConfig benchmark_cfg(double bw_hz = 96.06e6) {
  return make_ofdm_config(2.0e9, 60.0e3, bw_hz, 10.0e-3, 3.9810717055349851e-21);
}
}  // namespace

TEST_CASE("subcarrier count is round(W/df), forced odd") {
  CHECK(benchmark_cfg(96.06e6).num_subcarriers == 1601);
  CHECK(benchmark_cfg(96.0e6).num_subcarriers == 1601);  // 1600 bumped to odd
  CHECK(benchmark_cfg(6.0e6).num_subcarriers == 101);
  CHECK(benchmark_cfg(384.0e6).num_subcarriers == 6401);
  CHECK(benchmark_cfg(180e3).num_subcarriers == 3);
  CHECK(benchmark_cfg(96.06e6).bandwidth_hz() == doctest::Approx(96.06e6));
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS((void)benchmark_cfg(60e3), ConfigError);  // fewer than 3 tones
  CHECK_THROWS_AS((void)make_ofdm_config(2.0e9, 60.0e3, 3.0e9, 10e-3, 1e-21),
                  ConfigError);  // band wider than the carrier
  CHECK_THROWS_AS((void)make_ofdm_config(2.0e9, -60.0e3, 96e6, 10e-3, 1e-21),
                  ConfigError);
  CHECK_THROWS_AS((void)make_ofdm_config(2.0e9, 60.0e3, 96e6, 0.0, 1e-21),
                  ConfigError);
  CHECK_THROWS_AS((void)make_ofdm_config(2.0e9, 60.0e3, 96e6, 10e-3, 0.0),
                  ConfigError);
}

TEST_CASE("index grid is symmetric around the carrier") {
  const OfdmConfig cfg = benchmark_cfg();
  CHECK(cfg.half_span() == 800);
  CHECK(cfg.subcarrier_index(0) == -800);
  CHECK(cfg.subcarrier_index(800) == 0);
  CHECK(cfg.subcarrier_index(1600) == 800);
}

TEST_CASE("per-symbol energy spreads the transmit power over the band") {
  const OfdmConfig cfg = benchmark_cfg();
  CHECK(cfg.symbol_energy_j() ==
        doctest::Approx(10.0e-3 / cfg.bandwidth_hz()).epsilon(1e-15));
  // N * E_s * df = P_tx
  CHECK(cfg.num_subcarriers * cfg.symbol_energy_j() * cfg.subcarrier_spacing_hz ==
        doctest::Approx(10.0e-3).epsilon(1e-15));
}

TEST_CASE("linear SNR at the benchmark direct path") {
  const OfdmConfig cfg = benchmark_cfg();
  CHECK(linear_snr(cfg, 0.00016869252587390247) ==
        doctest::Approx(1191352.9149346279).epsilon(1e-12));
  // Independent of bandwidth: energy per symbol drops as N grows but the
  // coherent sum over N symbols recovers it.
  CHECK(linear_snr(benchmark_cfg(6e6), 1e-4) ==
        doctest::Approx(linear_snr(benchmark_cfg(384e6), 1e-4)).epsilon(1e-12));
}

TEST_CASE("steering vector matches the per-subcarrier phase ramp") {
  const OfdmConfig cfg = benchmark_cfg(1.86e6);  // N = 31
  const double tau = 2.3586543367496841e-07;
  const auto a = steering_vector(cfg, tau);
  REQUIRE(static_cast<int>(a.size()) == cfg.num_subcarriers);
  for (int k = 0; k < cfg.num_subcarriers; ++k) {
    const double ang =
        -kTwoPi * cfg.subcarrier_index(k) * cfg.subcarrier_spacing_hz * tau;
    CHECK(std::abs(a[k] - cplx(std::cos(ang), std::sin(ang))) < 1e-12);
    CHECK(std::abs(std::abs(a[k]) - 1.0) < 1e-13);
  }
  // Symmetric grid: element at -n is the conjugate of the element at +n.
  for (int k = 0; k < cfg.num_subcarriers; ++k) {
    CHECK(std::abs(a[k] - std::conj(a[cfg.num_subcarriers - 1 - k])) < 1e-12);
  }
  // Zero delay gives the all-ones vector.
  for (const cplx& v : steering_vector(cfg, 0.0)) CHECK(v == cplx(1.0, 0.0));
}

TEST_CASE("dirichlet ratio equals the explicit tone sum") {
  const double df = 60.0e3;
  const int n = 31;
  for (double x : {0.0, 3.1e-9, 1.7e-7, -8.4e-7, 5.0e-6, 1.0 / df / 3.0}) {
    cplx acc(0.0, 0.0);
    for (int k = 0; k < n; ++k) {
      acc += cis(-kTwoPi * (k - (n - 1) / 2) * df * x);
    }
    CHECK(std::abs(acc.imag()) < 1e-9 * n);  // real by symmetry
    CHECK(dirichlet_ratio(n, df, x) == doctest::Approx(acc.real()).epsilon(1e-11));
  }
  CHECK(dirichlet_ratio(n, df, 1.7e-7) ==
        doctest::Approx(26.151797061083794).epsilon(1e-12));
}

TEST_CASE("dirichlet ratio: peak, parity, periodicity, and tiny angles") {
  const double df = 60.0e3;
  const int n = 1601;
  CHECK(dirichlet_ratio(n, df, 0.0) == doctest::Approx(n));
  CHECK(dirichlet_ratio(n, df, 4.2e-8) ==
        doctest::Approx(dirichlet_ratio(n, df, -4.2e-8)).epsilon(1e-12));
  // Odd N: period 1/df in the delay difference.
  CHECK(dirichlet_ratio(n, df, 4.2e-8 + 1.0 / df) ==
        doctest::Approx(dirichlet_ratio(n, df, 4.2e-8)).epsilon(1e-9));
  // Near-zero angles go through the series branch and stay near the peak.
  const double eps = 1e-10 / df;
  CHECK(dirichlet_ratio(n, df, eps) == doctest::Approx(n).epsilon(1e-6));
  // Exactly at a multiple of the period the ratio is back at N.
  CHECK(dirichlet_ratio(n, df, 1.0 / df) == doctest::Approx(n).epsilon(1e-9));
}
