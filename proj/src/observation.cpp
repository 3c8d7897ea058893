#include "apcal/observation.hpp"

#include <cmath>

#include "apcal/constants.hpp"
#include "apcal/errors.hpp"
#include "apcal/numeric.hpp"
#include "apcal/rng.hpp"

namespace apcal {

PilotSequence constant_pilots(const OfdmConfig& cfg) {
  PilotSequence p;
  p.symbols.assign(cfg.num_subcarriers,
                   std::complex<double>(std::sqrt(cfg.symbol_energy_j()), 0.0));
  return p;
}

PilotSequence qpsk_pilots(const OfdmConfig& cfg, std::uint64_t seed) {
  RandomStream rs(seed);
  const double amp = std::sqrt(cfg.symbol_energy_j());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  PilotSequence p;
  p.symbols.reserve(cfg.num_subcarriers);
  for (int k = 0; k < cfg.num_subcarriers; ++k) {
    const std::uint64_t q = rs.below(4);
    // Gray-free mapping of the four diagonal constellation points.
    const double re = (q == 0 || q == 3) ? inv_sqrt2 : -inv_sqrt2;
    const double im = (q == 0 || q == 1) ? inv_sqrt2 : -inv_sqrt2;
    p.symbols.emplace_back(amp * re, amp * im);
  }
  return p;
}

namespace {

void check_pilots(const OfdmConfig& cfg, const PilotSequence& pilots,
                  const char* which) {
  if (static_cast<int>(pilots.symbols.size()) != cfg.num_subcarriers) {
    throw ModelError(std::string("pilot sequence ") + which +
                     " does not match the subcarrier count");
  }
}

/// One path's contribution: gain * e^{j*phase} * steering(tau) .* pilots.
std::vector<std::complex<double>> path_component(const OfdmConfig& cfg,
                                                 const PilotSequence& pilots,
                                                 double gain,
                                                 double pseudo_delay_s,
                                                 double additive_offset_rad) {
  const double phase = carrier_phase_rad(cfg.carrier_freq_hz, pseudo_delay_s,
                                         additive_offset_rad);
  const std::complex<double> scale = gain * cis(phase);
  std::vector<std::complex<double>> v = steering_vector(cfg, pseudo_delay_s);
  for (int k = 0; k < cfg.num_subcarriers; ++k) {
    v[k] *= scale * pilots.symbols[k];
  }
  return v;
}

}  // namespace

LinkPathMeans link_path_means(const ChannelTruth& truth, const OfdmConfig& cfg,
                              const PilotSequence& pilots, bool a_to_b) {
  check_pilots(cfg, pilots, a_to_b ? "A" : "B");
  const double dir = a_to_b ? 1.0 : -1.0;
  const double clock = dir * truth.offsets.clock_offset_s;
  const double phase = dir * truth.offsets.phase_offset_rad;

  LinkPathMeans out;
  out.los = path_component(cfg, pilots, truth.los_gain(cfg.carrier_freq_hz),
                           truth.los_delay_s() + clock, phase);
  if (truth.two_path) {
    // The bounce phase is direction-independent; only the downconversion
    // offset flips sign with the link direction.
    out.reflected = path_component(
        cfg, pilots, truth.reflected_gain(cfg.carrier_freq_hz),
        truth.reflected_delay_s() + clock, truth.reflection_phase_rad + phase);
  }
  return out;
}

std::vector<std::complex<double>> link_mean(const ChannelTruth& truth,
                                            const OfdmConfig& cfg,
                                            const PilotSequence& pilots,
                                            bool a_to_b) {
  LinkPathMeans parts = link_path_means(truth, cfg, pilots, a_to_b);
  if (!parts.reflected.empty()) {
    for (std::size_t k = 0; k < parts.los.size(); ++k) {
      parts.los[k] += parts.reflected[k];
    }
  }
  return parts.los;
}

ObservationSet synth_observation(const ChannelTruth& truth, const OfdmConfig& cfg,
                                 LinkDirection direction,
                                 const PilotSequence& pilots_a,
                                 const PilotSequence& pilots_b,
                                 std::optional<std::uint64_t> noise_seed) {
  ObservationSet obs;
  obs.cfg = cfg;
  obs.direction = direction;
  obs.pilots_a = pilots_a;
  obs.y_ab = link_mean(truth, cfg, pilots_a, /*a_to_b=*/true);
  if (direction == LinkDirection::bidirectional) {
    obs.pilots_b = pilots_b;
    obs.y_ba = link_mean(truth, cfg, pilots_b, /*a_to_b=*/false);
  }
  if (noise_seed.has_value()) {
    RandomStream rs(*noise_seed);
    for (auto& y : obs.y_ab) y += rs.complex_gaussian(cfg.noise_psd_w_hz);
    for (auto& y : obs.y_ba) y += rs.complex_gaussian(cfg.noise_psd_w_hz);
  }
  return obs;
}

}  // namespace apcal
