#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "apcal/constants.hpp"
#include "apcal/errors.hpp"
#include "apcal/geometry.hpp"

using namespace apcal;

namespace {
// Benchmark deployment: A at (50, 50), B at the origin, reflector at (0, -10).
const Position2D kA{50.0, 50.0};
const Position2D kB{0.0, 0.0};
const Position2D kR{0.0, -10.0};
}  // namespace

TEST_CASE("distance is symmetric and matches the benchmark layout") {
  CHECK(distance_m(kA, kB) == doctest::Approx(70.710678118654755).epsilon(1e-15));
  CHECK(distance_m(kA, kB) == distance_m(kB, kA));
  CHECK(distance_m(kA, kA) == 0.0);
  CHECK(distance_m(Position2D{3.0, 0.0}, Position2D{0.0, 4.0}) ==
        doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("propagation delay is distance over the speed of light") {
  const double d = distance_m(kA, kB);
  CHECK(propagation_delay_s(kA, kB) ==
        doctest::Approx(d / kSpeedOfLight).epsilon(1e-15));
  CHECK(propagation_delay_s(kA, kB) ==
        doctest::Approx(2.3586543367496841e-07).epsilon(1e-15));
}

TEST_CASE("coincident endpoints are rejected") {
  CHECK_THROWS_AS((void)propagation_delay_s(kA, kA), ConfigError);
  CHECK_THROWS_AS((void)reflection_delay_s(kA, kA, kB), ConfigError);
  CHECK_THROWS_AS((void)reflection_delay_s(kA, kB, kB), ConfigError);
}

TEST_CASE("reflection delay covers both legs and beats the direct path") {
  const double direct = propagation_delay_s(kA, kB);
  const double bounced = reflection_delay_s(kA, kR, kB);
  CHECK(bounced == doctest::Approx(2.9387829616136152e-07).epsilon(1e-15));
  // Triangle inequality: the bounce can never be shorter.
  CHECK(bounced > direct);
  // Direction symmetry of the bounce path.
  CHECK(bounced == reflection_delay_s(kB, kR, kA));
}

TEST_CASE("free-space amplitude gain") {
  const double fc = 2.0e9;
  const double lambda = kSpeedOfLight / fc;
  CHECK(path_gain(70.710678118654755, fc) ==
        doctest::Approx(lambda / (4.0 * kPi * 70.710678118654755)).epsilon(1e-15));
  CHECK(path_gain(70.710678118654755, fc) ==
        doctest::Approx(0.00016869252587390247).epsilon(1e-14));
  // Doubling the distance halves the amplitude.
  CHECK(path_gain(20.0, fc) == doctest::Approx(0.5 * path_gain(10.0, fc)));
  CHECK_THROWS_AS((void)path_gain(0.0, fc), ConfigError);
  CHECK_THROWS_AS((void)path_gain(10.0, 0.0), ConfigError);
}
