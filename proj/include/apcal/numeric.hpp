// Small numeric helpers: phase-safe trigonometry and angle wrapping.
#pragma once

#include <cmath>
#include <complex>

namespace apcal {

/// exp(j*x) for possibly huge arguments. Reducing the argument with
/// remainder() first keeps full precision when |x| reaches 1e4..1e6 rad,
/// which routinely happens once carrier frequency multiplies a delay.
inline std::complex<double> cis(double x) {
  const double r = std::remainder(x, 2.0 * M_PI);
  return {std::cos(r), std::sin(r)};
}

/// Wrap an angle to [-pi, pi).
inline double wrap_pm_pi(double x) {
  double r = std::remainder(x, 2.0 * M_PI);
  if (r >= M_PI) r -= 2.0 * M_PI;  // remainder() may return exactly +pi
  return r;
}

/// Wrap a value into [-period/2, period/2). Used for phase estimates whose
/// ambiguity interval is narrower than a full turn.
inline double wrap_to_period(double x, double period) {
  double r = std::remainder(x, period);
  if (r >= 0.5 * period) r -= period;
  if (r < -0.5 * period) r += period;
  return r;
}

/// Periodic sinc ratio sin(N*theta)/sin(theta) evaluated at theta = pi*df*x,
/// the inner product of two unit-amplitude tone sweeps over N symmetrically
/// indexed subcarriers separated by a delay difference x. Real and even in x;
/// equals N at x = 0 and is periodic in x with period 1/df for odd N.
double dirichlet_ratio(int n, double subcarrier_spacing_hz, double delay_diff_s);

}  // namespace apcal
