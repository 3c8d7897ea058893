// Physical and mathematical constants shared across the library.
#pragma once

namespace apcal {

/// Speed of light in vacuum [m/s] (exact by definition of the metre).
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Degrees <-> radians.
inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace apcal
