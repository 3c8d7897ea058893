// OFDM waveform bookkeeping: subcarrier grid, per-symbol energy, SNR, and the
// frequency-domain delay response (steering vector) of a propagation delay.
#pragma once

#include <complex>
#include <vector>

namespace apcal {

/// Static description of the pilot OFDM symbol used on both links.
///
/// Subcarriers are indexed symmetrically around the carrier,
/// n in {-(N-1)/2, ..., (N-1)/2}, so N is always odd. Baseband subcarrier n
/// sits at offset n * subcarrier_spacing_hz from the carrier.
struct OfdmConfig {
  double carrier_freq_hz = 0.0;
  double subcarrier_spacing_hz = 0.0;
  int num_subcarriers = 0;  ///< odd by construction
  double tx_power_w = 0.0;  ///< total transmit power spread over the band
  double noise_psd_w_hz = 0.0;  ///< one-sided noise power spectral density

  /// Occupied bandwidth N * df [Hz].
  double bandwidth_hz() const;
  /// Energy per pilot subcarrier symbol, E_s = P_tx / W [J].
  double symbol_energy_j() const;
  /// Largest subcarrier index, (N-1)/2.
  int half_span() const { return (num_subcarriers - 1) / 2; }
  /// Subcarrier index of vector element k (k = 0 maps to -(N-1)/2).
  int subcarrier_index(int k) const { return k - half_span(); }
};

/// Build a validated config from a requested bandwidth. The subcarrier count
/// is round(W / df), bumped by one if even so the index grid stays symmetric;
/// the realized bandwidth_hz() may therefore differ slightly from the request.
/// Throws ConfigError on non-positive inputs or a grid of fewer than 3 tones.
OfdmConfig make_ofdm_config(double carrier_freq_hz, double subcarrier_spacing_hz,
                            double bandwidth_hz, double tx_power_w,
                            double noise_psd_w_hz);

/// Post-integration SNR of a link with amplitude gain beta:
/// E_s * beta^2 * N / N0 = P_tx * beta^2 / (df * N0).
double linear_snr(const OfdmConfig& cfg, double amplitude_gain);

/// Frequency-domain response of a pure delay across the subcarrier grid:
/// element k equals exp(-j*2*pi*n*df*tau) with n = subcarrier_index(k).
/// The carrier-frequency phase rotation is tracked separately (see
/// carrier_phase_rad), so this captures only the per-subcarrier tilt.
std::vector<std::complex<double>> steering_vector(const OfdmConfig& cfg,
                                                  double pseudo_delay_s);

}  // namespace apcal
