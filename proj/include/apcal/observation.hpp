// Pilot symbols and synthetic frequency-domain observations of the channel
// between the two access points.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "apcal/channel.hpp"
#include "apcal/ofdm.hpp"

namespace apcal {

/// Which link directions were measured.
enum class LinkDirection {
  uni_ab,         ///< A transmits, B receives
  bidirectional,  ///< both A -> B and B -> A within one coherence window
};

/// Known pilot symbols over the subcarrier grid, scaled so that every symbol
/// carries energy E_s = P_tx / W (unit modulus before scaling).
struct PilotSequence {
  std::vector<std::complex<double>> symbols;
};

/// All-identical pilots: sqrt(E_s) on every subcarrier.
PilotSequence constant_pilots(const OfdmConfig& cfg);

/// Seeded pseudo-random QPSK pilots with per-symbol energy E_s.
PilotSequence qpsk_pilots(const OfdmConfig& cfg, std::uint64_t seed);

/// One calibration snapshot: configuration, pilots, and the received
/// frequency-domain samples. y_ba is stored unconjugated; estimators that
/// stack both directions apply the conjugation themselves.
struct ObservationSet {
  OfdmConfig cfg;
  LinkDirection direction = LinkDirection::uni_ab;
  PilotSequence pilots_a;
  PilotSequence pilots_b;  ///< empty for uni_ab
  std::vector<std::complex<double>> y_ab;
  std::vector<std::complex<double>> y_ba;  ///< empty for uni_ab
};

/// Noiseless received mean of one direction (a_to_b or the reverse),
/// including path gains, steering vectors, carrier phases, and the
/// direction-appropriate signs of the clock/phase offsets.
std::vector<std::complex<double>> link_mean(const ChannelTruth& truth,
                                            const OfdmConfig& cfg,
                                            const PilotSequence& pilots,
                                            bool a_to_b);

/// Per-path components of link_mean (direct path, then the bounce path when
/// the channel has one). Summing the parts reproduces link_mean.
struct LinkPathMeans {
  std::vector<std::complex<double>> los;
  std::vector<std::complex<double>> reflected;  ///< empty for single-path truth
};
LinkPathMeans link_path_means(const ChannelTruth& truth, const OfdmConfig& cfg,
                              const PilotSequence& pilots, bool a_to_b);

/// Synthesize an observation of the given channel. If noise_seed is empty the
/// samples are the exact noiseless means; otherwise circularly-symmetric
/// white noise with per-subcarrier variance N0 is added (independent draws
/// per direction). Pilot vectors must match the subcarrier count.
ObservationSet synth_observation(const ChannelTruth& truth, const OfdmConfig& cfg,
                                 LinkDirection direction,
                                 const PilotSequence& pilots_a,
                                 const PilotSequence& pilots_b,
                                 std::optional<std::uint64_t> noise_seed);

}  // namespace apcal
