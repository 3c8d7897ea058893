// Fisher-information and Cramer-Rao lower-bound computations for the
// calibration parameter families, plus the closed-form single-path bounds.
#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "apcal/estimator.hpp"
#include "apcal/observation.hpp"

namespace apcal {

/// Parameter family the information matrix is computed for. Known-position
/// families observe one direction; unknown-position families require the
/// bidirectional stack (a single direction cannot separate tau_AB from the
/// clock offset).
enum class FimVariant {
  known_pos_los,        ///< {delta_t, delta_phi, beta_AB}
  known_pos_two_path,   ///< + {tau_AR, phi_AR, beta_AR}
  unknown_pos_los,      ///< {tau_AB, delta_t, delta_phi, beta_AB}
  unknown_pos_two_path, ///< + {tau_AR, phi_AR, beta_AR}
};

/// Ordered parameter labels for a family, after removing entries pinned by
/// map knowledge (reflected delay / reflection phase).
std::vector<std::string> fim_parameter_labels(FimVariant variant,
                                              const MapKnowledge& map);

/// Noiseless observation mean for the family: the one-way mean for
/// known-position variants, the conjugate-stacked two-way mean otherwise.
std::vector<std::complex<double>> mean_vector(const ChannelTruth& truth,
                                              const OfdmConfig& cfg,
                                              const PilotSequence& pilots_a,
                                              const PilotSequence& pilots_b,
                                              FimVariant variant);

/// Partial derivatives of the mean with respect to each labeled parameter,
/// in label order. Analytic expressions (validated against central finite
/// differences in the test suite).
std::vector<std::vector<std::complex<double>>> mean_derivatives(
    const ChannelTruth& truth, const OfdmConfig& cfg,
    const PilotSequence& pilots_a, const PilotSequence& pilots_b,
    FimVariant variant, const MapKnowledge& map);

/// Fisher information matrix for complex white noise of per-sample variance
/// noise_psd: J_ij = (2 / N0) * Re{ d_i^H d_j }.
Eigen::MatrixXd fim(
    const std::vector<std::vector<std::complex<double>>>& derivatives,
    double noise_psd_w_hz);

/// Bound report: information matrix, per-parameter variances (diagonal of its
/// inverse), and conditioning diagnostics.
struct CrlbReport {
  FimVariant variant = FimVariant::known_pos_los;
  std::vector<std::string> labels;
  Eigen::MatrixXd information;
  Eigen::VectorXd variance;
  double condition = 0.0;
  double snr_linear = 0.0;  ///< direct-path SNR at the configured power
};

/// Numeric bound at the given truth. Inversion goes through a symmetric
/// eigendecomposition; a non-positive or worse-than-1e12-conditioned
/// information matrix raises ModelError (the parameterization is not
/// identifiable from this observation).
CrlbReport crlb_numeric(const ChannelTruth& truth, const OfdmConfig& cfg,
                        const PilotSequence& pilots_a,
                        const PilotSequence& pilots_b, FimVariant variant,
                        const MapKnowledge& map);

/// Closed-form single-path bounds (exact for the finite symmetric subcarrier
/// grid; the effective squared bandwidth is df^2 (N^2 - 1)).
struct KnownPosLosBounds {
  double clock_offset_var_s2 = 0.0;
  double phase_offset_var_rad2 = 0.0;
};
KnownPosLosBounds crlb_closed_form_known_pos_los(const OfdmConfig& cfg,
                                                 double snr_linear);

struct UnknownPosLosBounds {
  double tau_ab_var_s2 = 0.0;
  double clock_offset_var_s2 = 0.0;
  double phase_offset_var_rad2 = 0.0;
};
UnknownPosLosBounds crlb_closed_form_unknown_pos_los(const OfdmConfig& cfg,
                                                     double snr_linear);

}  // namespace apcal
