#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "apcal/channel.hpp"
#include "apcal/constants.hpp"
#include "apcal/numeric.hpp"

using namespace apcal;

namespace {
ChannelTruth benchmark_truth() {
  ChannelTruth t;
  t.pos_a = {50.0, 50.0};
  t.pos_b = {0.0, 0.0};
  t.pos_reflector = {0.0, -10.0};
  t.offsets.clock_offset_s = 0.67e-6;
  t.offsets.phase_offset_rad = deg_to_rad(10.0);
  t.reflection_phase_rad = deg_to_rad(20.0);
  t.two_path = true;
  return t;
}
}  // namespace

TEST_CASE("benchmark deployment delays and gains") {
  const ChannelTruth t = benchmark_truth();
  CHECK(t.los_delay_s() == doctest::Approx(2.3586543367496841e-07).epsilon(1e-15));
  CHECK(t.reflected_delay_s() ==
        doctest::Approx(2.9387829616136152e-07).epsilon(1e-15));
  CHECK(t.los_gain(2.0e9) ==
        doctest::Approx(0.00016869252587390247).epsilon(1e-14));
  CHECK(t.reflected_gain(2.0e9) ==
        doctest::Approx(0.00013539188260138405).epsilon(1e-14));
  // The bounce is both later and weaker than the direct path.
  CHECK(t.reflected_delay_s() > t.los_delay_s());
  CHECK(t.reflected_gain(2.0e9) < t.los_gain(2.0e9));
}

TEST_CASE("carrier phase accumulates delay and additive offsets") {
  const double fc = 2.0e9;
  const double tau = 2.3586543367496841e-07;
  const double extra = deg_to_rad(10.0);
  const double phi = carrier_phase_rad(fc, tau, extra);
  CHECK(phi == doctest::Approx(-kTwoPi * fc * tau - extra).epsilon(1e-15));
  // Linear in both arguments.
  CHECK(carrier_phase_rad(fc, tau, 0.0) - carrier_phase_rad(fc, 0.0, 0.0) ==
        doctest::Approx(-kTwoPi * fc * tau));
  CHECK(carrier_phase_rad(fc, tau, extra) - carrier_phase_rad(fc, tau, 0.0) ==
        doctest::Approx(-extra));
}

TEST_CASE("angle helpers wrap into their canonical intervals") {
  CHECK(wrap_pm_pi(3.0 * kPi) == doctest::Approx(-kPi));
  CHECK(wrap_pm_pi(kPi) == doctest::Approx(-kPi));
  CHECK(wrap_pm_pi(0.25) == doctest::Approx(0.25));
  CHECK(wrap_to_period(kPi + 0.05, kPi) == doctest::Approx(0.05));
  CHECK(wrap_to_period(-0.6 * kPi, kPi) == doctest::Approx(0.4 * kPi));
  CHECK(wrap_to_period(0.5 * kPi, kPi) == doctest::Approx(-0.5 * kPi));
  // cis stays accurate for large arguments.
  const double big = 1.0e6;
  CHECK(std::abs(cis(big) - cis(big + kTwoPi * 1000.0)) < 1e-9);
  CHECK(std::abs(cis(0.0) - std::complex<double>(1.0, 0.0)) == 0.0);
}
