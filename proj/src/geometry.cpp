#include "apcal/geometry.hpp"

#include <cmath>

#include "apcal/constants.hpp"
#include "apcal/errors.hpp"

namespace apcal {

double distance_m(const Position2D& a, const Position2D& b) {
  return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
}

double propagation_delay_s(const Position2D& a, const Position2D& b) {
  const double d = distance_m(a, b);
  if (d <= 0.0) {
    throw ConfigError("propagation path has zero length: endpoints coincide");
  }
  return d / kSpeedOfLight;
}

double reflection_delay_s(const Position2D& a, const Position2D& reflector,
                          const Position2D& b) {
  const double leg1 = distance_m(a, reflector);
  const double leg2 = distance_m(reflector, b);
  if (leg1 <= 0.0 || leg2 <= 0.0) {
    throw ConfigError("reflected path has a zero-length leg: reflector coincides with an endpoint");
  }
  return (leg1 + leg2) / kSpeedOfLight;
}

double path_gain(double path_length_m, double carrier_freq_hz) {
  if (path_length_m <= 0.0) {
    throw ConfigError("path_gain: path length must be positive");
  }
  if (carrier_freq_hz <= 0.0) {
    throw ConfigError("path_gain: carrier frequency must be positive");
  }
  const double wavelength_m = kSpeedOfLight / carrier_freq_hz;
  return wavelength_m / (4.0 * kPi * path_length_m);
}

}  // namespace apcal
