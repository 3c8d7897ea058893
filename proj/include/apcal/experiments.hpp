// Monte-Carlo experiments: single trials, RMSE-versus-bandwidth sweeps with
// CRLB reference columns, and 1-D slices of the concentrated loss surface.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apcal/crlb.hpp"
#include "apcal/estimator.hpp"
#include "apcal/observation.hpp"

namespace apcal {

/// Deployment scenario. known_positions assumes the access-point geometry is
/// surveyed (tau_AB given, one-way link suffices); unknown_positions estimates
/// tau_AB too and therefore requires bidirectional observations.
enum class ScenarioId { known_positions, unknown_positions };

enum class PilotKind { constant, qpsk };

/// Everything needed to reproduce one experiment family.
struct ScenarioConfig {
  ScenarioId id = ScenarioId::known_positions;
  ChannelTruth truth;           ///< includes the observation channel (two_path flag)
  double carrier_freq_hz = 2.0e9;
  double subcarrier_spacing_hz = 60.0e3;
  double bandwidth_hz = 96.06e6;  ///< for single-bandwidth commands
  double tx_power_w = 10.0e-3;
  double noise_psd_w_hz = 3.9810717055349851e-21;  ///< -174 dBm/Hz
  LinkDirection direction = LinkDirection::uni_ab;
  bool estimator_two_path = true;  ///< estimator hypothesis (may mismatch truth)
  MapKnowledge map;
  PilotKind pilot_kind = PilotKind::constant;
  std::uint64_t pilot_seed = 1;
  std::optional<std::uint64_t> noise_seed;  ///< for simulate/profile commands
};

/// Estimator kind implied by direction and channel hypothesis.
EstimatorKind scenario_estimator_kind(const ScenarioConfig& sc);

/// Validate cross-field consistency (e.g. unknown positions demand
/// bidirectional observations). Throws ConfigError.
void validate_scenario(const ScenarioConfig& sc);

/// Monte-Carlo sweep specification.
struct SweepSpec {
  std::vector<double> bandwidths_hz;
  int trials = 50;
  std::uint64_t base_seed = 20260822;
  /// Half-width [m] of the uniform per-trial jitter applied to the centers of
  /// searched delay axes, so grid nodes fall at random offsets from the truth
  /// the way they would against an unsurveyed deployment. 0 disables.
  double center_jitter_m = 0.0375;
};

/// One aggregated sweep row.
struct RmseRecord {
  double w_hz = 0.0;
  std::string param;  ///< "clock_offset" | "phase_offset" | "tau_ab"
  double rmse = 0.0;
  double crlb_std = 0.0;
  std::string unit;  ///< "s" | "rad"
  int trials = 0;
  int degenerate_count = 0;  ///< trials with ridge-regularized Gram or negative gain
};

/// One trial: derive stream seeds, synthesize a noisy observation, jitter the
/// search centers, run the estimator.
struct TrialResult {
  EstimateResult estimate;
  ParameterVector truth_params;
};
TrialResult run_trial(const ScenarioConfig& sc, const GridSpec& grid,
                      double bandwidth_hz, std::uint64_t base_seed,
                      std::uint64_t bandwidth_index, std::uint64_t trial_index,
                      double center_jitter_m);

/// Full RMSE-versus-bandwidth sweep. Trials are independent and distributed
/// over `threads` workers into preassigned slots, so the output is identical
/// for any thread count. Records appear in bandwidth-major, fixed parameter
/// order (tau_ab when estimated, clock_offset, phase_offset).
std::vector<RmseRecord> run_sweep(const ScenarioConfig& sc, const GridSpec& grid,
                                  const SweepSpec& sweep, int threads);

/// Signed estimation error wrapped to [-period/2, period/2). Pass period = 0
/// for unwrapped (plain) differences.
double wrapped_error(double estimate, double truth, double period);

/// 1-D slice of the concentrated loss through the truth.
struct ProfileSpec {
  enum class Axis { clock_offset, tau_ab, tau_ar, reflection_phase };
  Axis axis = Axis::clock_offset;
  double half_width_s = 30.0 / kSpeedOfLight;  ///< delay axes
  double half_width_rad = kPi;                 ///< phase axis
  int points = 1201;
};
/// Returns (axis offset from truth, concentrated loss) pairs. Offsets are
/// seconds for delay axes, radians for the phase axis. All other free
/// parameters sit at their true values.
std::vector<std::pair<double, double>> nllf_profile(const ScenarioConfig& sc,
                                                    const ProfileSpec& spec);

/// CSV writers (17-significant-digit doubles, '.' decimal separator).
void write_rmse_csv(const std::string& path,
                    const std::vector<RmseRecord>& records);
void write_profile_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& samples,
                       const std::string& axis_name);

}  // namespace apcal
