// Planar deployment geometry: positions, path lengths, delays, and the
// free-space amplitude gain of a propagation path.
#pragma once

namespace apcal {

/// Position in a 2-D deployment plane, metres.
struct Position2D {
  double x_m = 0.0;
  double y_m = 0.0;
};

/// Euclidean distance [m].
double distance_m(const Position2D& a, const Position2D& b);

/// One-way propagation delay [s] over the direct path a -> b.
/// Throws ConfigError if the positions coincide.
double propagation_delay_s(const Position2D& a, const Position2D& b);

/// Propagation delay [s] over the bounce path a -> reflector -> b.
/// Throws ConfigError if either leg has zero length.
double reflection_delay_s(const Position2D& a, const Position2D& reflector,
                          const Position2D& b);

/// Free-space amplitude gain lambda / (4*pi*L) for total path length L [m]
/// at carrier frequency f_c [Hz]. Dimensionless; squares to the usual
/// free-space power loss. Throws ConfigError on non-positive inputs.
double path_gain(double path_length_m, double carrier_freq_hz);

}  // namespace apcal
