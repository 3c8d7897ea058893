// Maximum-likelihood calibration estimators. Amplitudes and the common phase
// offset are concentrated out of the likelihood in closed form; the remaining
// delay/phase parameters are found by multi-level grid refinement.
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "apcal/constants.hpp"
#include "apcal/observation.hpp"

namespace apcal {

/// Estimator family: link direction x channel hypothesis.
enum class EstimatorKind {
  uni_los,       ///< one direction, single-path hypothesis; searches delta_t
  uni_two_path,  ///< one direction, bounce hypothesis; adds tau_AR, phi_AR
  bi_los,        ///< both directions, single path; searches tau_AB, delta_t
  bi_two_path,   ///< both directions, bounce hypothesis; 4-D search (coarse,
                 ///< experimental)
};

/// Whether reflected-path properties are known a priori (e.g. from a site
/// survey). Known quantities are pinned to their supplied values instead of
/// being searched.
struct MapKnowledge {
  bool reflected_delay_known = false;
  bool reflection_phase_known = false;
};

/// A point in the full calibration parameter space. Estimators fill the
/// entries they determine and copy pinned/known entries through.
struct ParameterVector {
  double tau_ab_s = 0.0;             ///< direct-path delay
  double clock_offset_s = 0.0;       ///< delta_t of B relative to A
  double phase_offset_rad = 0.0;     ///< delta_phi of B relative to A
  double tau_ar_s = 0.0;             ///< bounce-path delay (0 if unused)
  double reflection_phase_rad = 0.0; ///< bounce-path phase (0 if unused)
  double gain_ab = 0.0;              ///< direct-path amplitude
  double gain_ar = 0.0;              ///< bounce-path amplitude (0 if unused)
};

/// Search-grid geometry. Delay axes share one step per refinement level so
/// that sum/difference combinations of axes land on uniform grids; the coarse
/// step scales with the inverse bandwidth (a fraction of the envelope
/// resolution 1/W), the phase axis with a fixed angular step.
struct GridSpec {
  int refinement_levels = 5;      ///< zoom passes after the coarse scan
  double shrink_factor = 0.1;     ///< step ratio between consecutive levels
  double delay_step_fraction = 0.125;  ///< coarse delay step = fraction / W
  double phase_step_rad = deg_to_rad(2.0);
  double clock_half_width_s = 75.0 / kSpeedOfLight;
  double tau_ab_half_width_s = 7.5 / kSpeedOfLight;
  double tau_ar_half_width_s = 15.0 / kSpeedOfLight;
};

/// Axis centers and pinned values. Searched axes cover center +/- half-width;
/// known/pinned quantities are taken from here verbatim. The reflection-phase
/// axis, when searched, always spans the full circle.
struct SearchCenters {
  double tau_ab_s = 0.0;
  double clock_offset_s = 0.0;
  double tau_ar_s = 0.0;
  double reflection_phase_rad = 0.0;
};

/// Output of one grid-refined estimate.
struct EstimateResult {
  EstimatorKind kind = EstimatorKind::uni_los;
  ParameterVector params;
  double nllf_at_min = 0.0;
  /// The concentrated phase offset is only observable modulo this period.
  double phase_ambiguity_period_rad = kPi;
  bool gram_regularized = false;  ///< component Gram matrix needed a ridge
  bool negative_gain = false;     ///< an amplitude resolved negative (kept)
  bool coarse_only = false;       ///< kind searched on capped/coarse grids
  std::uint64_t nllf_evaluations = 0;
  std::vector<double> level_minima;  ///< best loss after each level
};

/// Value of the concentrated negative log-likelihood at one point of the
/// free-parameter space, together with the closed-form minimizers that were
/// concentrated out.
struct NllfValue {
  double loss = 0.0;
  double phase_offset_rad = 0.0;  ///< canonical representative in [-pi/2, pi/2)
  double gain0 = 0.0;             ///< direct-path amplitude
  double gain1 = 0.0;             ///< bounce-path amplitude (0 for single path)
  bool gram_regularized = false;
};

/// Concentrated loss of each estimator family at an explicit point. These
/// build the model components directly (no tables) and are the reference the
/// grid engine is validated against.
NllfValue nllf_uni_los(const ObservationSet& obs, double tau_ab_s,
                       double clock_offset_s);
NllfValue nllf_uni_twopath(const ObservationSet& obs, double tau_ab_s,
                           double clock_offset_s, double tau_ar_s,
                           double reflection_phase_rad);
NllfValue nllf_bi_los(const ObservationSet& obs, double tau_ab_s,
                      double clock_offset_s);
NllfValue nllf_bi_twopath(const ObservationSet& obs, double tau_ab_s,
                          double clock_offset_s, double tau_ar_s,
                          double reflection_phase_rad);

/// Model component vectors (columns of the linear-gain model) at one point.
/// col1 is empty for single-path kinds. For bidirectional kinds each column
/// stacks the forward block over the conjugated reverse block.
struct ModelColumns {
  std::vector<std::complex<double>> col0;
  std::vector<std::complex<double>> col1;
};
ModelColumns model_columns(const ObservationSet& obs, EstimatorKind kind,
                           double tau_ab_s, double clock_offset_s,
                           double tau_ar_s, double reflection_phase_rad);

/// Observation vector the estimator actually fits: y_ab for one-way kinds,
/// [y_ab; conj(y_ba)] for bidirectional kinds.
std::vector<std::complex<double>> stacked_observation(const ObservationSet& obs,
                                                      EstimatorKind kind);

/// Split of the data/model pair used to read off the concentrated phase:
/// y_part = y - (1/2) C G^-1 C^H y and c_part = (1/2) C G^-1 conj(C^H y)
/// with G = C^H C. The phase offset enters their inner product as a pure
/// rotation, which recover_phase_offset inverts.
struct ConcentratedPair {
  std::vector<std::complex<double>> y_part;
  std::vector<std::complex<double>> c_part;
};
ConcentratedPair concentrate_pair(const ModelColumns& cols,
                                  const std::vector<std::complex<double>>& y);

/// Phase offset that minimizes the residual for fixed delay parameters,
/// reported as the canonical representative in [-pi/2, pi/2); the true value
/// is recoverable only modulo pi because a sign flip of the amplitudes
/// absorbs a half turn. `defined` is false when the inner product underflows.
struct PhaseRecovery {
  double phase_offset_rad = 0.0;
  double period_rad = kPi;
  bool defined = true;
};
PhaseRecovery recover_phase_offset(const ConcentratedPair& pair);

/// Real amplitudes minimizing the residual at a fixed phase offset:
/// G_r^-1 Re{e^{+j*phase} C^H y} with G_r = Re{C^H C}. If G_r is numerically
/// singular a small ridge proportional to its trace is added and *regularized
/// is set. Negative results are reported as-is (a negative amplitude at the
/// optimum means the hypothesized component points the wrong way).
std::array<double, 2> recover_gains(const ModelColumns& cols,
                                    const std::vector<std::complex<double>>& y,
                                    double phase_offset_rad, bool* regularized);

/// Full grid-refined maximum-likelihood estimate.
///
/// Searched axes per kind: uni_los {delta_t}; uni_two_path {delta_t, tau_AR,
/// phi_AR}; bi_los {tau_AB, delta_t}; bi_two_path {tau_AB, delta_t, tau_AR,
/// phi_AR}. MapKnowledge pins bounce-path axes to their SearchCenters values.
/// Ties are broken toward the lexicographically first grid point in the fixed
/// scan order (tau_AB, delta_t, tau_AR, phi_AR), making results deterministic.
/// Throws ModelError if the observation lacks the direction(s) the kind needs.
EstimateResult estimate(const ObservationSet& obs, EstimatorKind kind,
                        const MapKnowledge& map, const SearchCenters& centers,
                        const GridSpec& grid);

}  // namespace apcal
