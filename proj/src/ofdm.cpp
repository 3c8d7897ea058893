#include "apcal/ofdm.hpp"

#include <cmath>

#include "apcal/constants.hpp"
#include "apcal/errors.hpp"
#include "apcal/numeric.hpp"

namespace apcal {

double OfdmConfig::bandwidth_hz() const {
  return num_subcarriers * subcarrier_spacing_hz;
}

double OfdmConfig::symbol_energy_j() const {
  return tx_power_w / bandwidth_hz();
}

OfdmConfig make_ofdm_config(double carrier_freq_hz, double subcarrier_spacing_hz,
                            double bandwidth_hz, double tx_power_w,
                            double noise_psd_w_hz) {
  if (carrier_freq_hz <= 0.0) throw ConfigError("carrier frequency must be positive");
  if (subcarrier_spacing_hz <= 0.0) throw ConfigError("subcarrier spacing must be positive");
  if (bandwidth_hz <= 0.0) throw ConfigError("bandwidth must be positive");
  if (tx_power_w <= 0.0) throw ConfigError("transmit power must be positive");
  if (noise_psd_w_hz <= 0.0) throw ConfigError("noise spectral density must be positive");

  int n = static_cast<int>(std::llround(bandwidth_hz / subcarrier_spacing_hz));
  if (n % 2 == 0) ++n;  // keep the index grid symmetric around the carrier
  if (n < 3) {
    throw ConfigError("bandwidth supports fewer than 3 subcarriers at this spacing");
  }
  if (bandwidth_hz >= carrier_freq_hz) {
    throw ConfigError("bandwidth must be smaller than the carrier frequency");
  }

  OfdmConfig cfg;
  cfg.carrier_freq_hz = carrier_freq_hz;
  cfg.subcarrier_spacing_hz = subcarrier_spacing_hz;
  cfg.num_subcarriers = n;
  cfg.tx_power_w = tx_power_w;
  cfg.noise_psd_w_hz = noise_psd_w_hz;
  return cfg;
}

double linear_snr(const OfdmConfig& cfg, double amplitude_gain) {
  return cfg.tx_power_w * amplitude_gain * amplitude_gain /
         (cfg.subcarrier_spacing_hz * cfg.noise_psd_w_hz);
}

std::vector<std::complex<double>> steering_vector(const OfdmConfig& cfg,
                                                  double pseudo_delay_s) {
  const int n = cfg.num_subcarriers;
  std::vector<std::complex<double>> a(n);
  // a[k] = exp(-j*2*pi*n_k*df*tau). Successive subcarriers differ by a fixed
  // rotation, so one wrapped cis() anchors the first element and a complex
  // recurrence fills the rest without per-element trigonometry; the recurrence
  // over <= a few thousand unit-modulus multiplies stays well below 1e-12
  // drift.
  const double step_angle = -kTwoPi * cfg.subcarrier_spacing_hz * pseudo_delay_s;
  const std::complex<double> step = cis(step_angle);
  std::complex<double> cur = cis(step_angle * (-cfg.half_span()));
  for (int k = 0; k < n; ++k) {
    a[k] = cur;
    cur *= step;
  }
  return a;
}

double dirichlet_ratio(int n, double subcarrier_spacing_hz, double delay_diff_s) {
  // sum_{m=-(n-1)/2}^{(n-1)/2} exp(-j*2*pi*m*df*x) = sin(n*theta)/sin(theta),
  // theta = pi*df*x. For odd n the ratio is pi-periodic in theta, so reduce
  // theta first; near theta = 0 switch to the series to avoid 0/0.
  const double theta = std::remainder(kPi * subcarrier_spacing_hz * delay_diff_s, kPi);
  const double s = std::sin(theta);
  if (std::abs(s) < 1e-9) {
    const double t2 = theta * theta;
    return n * (1.0 - (static_cast<double>(n) * n - 1.0) * t2 / 6.0);
  }
  return std::sin(n * theta) / s;
}

}  // namespace apcal
