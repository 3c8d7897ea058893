#include "apcal/crlb.hpp"

#include <cmath>
#include <limits>

#include "apcal/constants.hpp"
#include "apcal/errors.hpp"

namespace apcal {
namespace {

using cplx = std::complex<double>;
using VecC = std::vector<cplx>;

bool is_two_path_variant(FimVariant v) {
  return v == FimVariant::known_pos_two_path ||
         v == FimVariant::unknown_pos_two_path;
}

bool is_stacked_variant(FimVariant v) {
  return v == FimVariant::unknown_pos_los ||
         v == FimVariant::unknown_pos_two_path;
}

// Frequency-derivative factor of sample k: d/dtau of a path term multiplies
// it by -j*2*pi*(f_c + n_k*df).
cplx delay_derivative_factor(const OfdmConfig& cfg, int k) {
  return cplx(0.0, -kTwoPi * (cfg.carrier_freq_hz +
                              cfg.subcarrier_index(k) * cfg.subcarrier_spacing_hz));
}

struct MeanParts {
  VecC los;        // stacked when the variant stacks
  VecC reflected;  // empty for single-path variants
  int n = 0;       // samples per block
  int blocks = 1;
};

MeanParts build_parts(const ChannelTruth& truth, const OfdmConfig& cfg,
                      const PilotSequence& pilots_a, const PilotSequence& pilots_b,
                      FimVariant variant) {
  if (is_two_path_variant(variant) && !truth.two_path) {
    throw ModelError("two-path information matrix requires a two-path channel truth");
  }
  MeanParts mp;
  mp.n = cfg.num_subcarriers;
  // Single-path variants deliberately drop the bounce component: they bound
  // the estimator that models the channel as line-of-sight only.
  ChannelTruth model = truth;
  model.two_path = is_two_path_variant(variant);

  LinkPathMeans fwd = link_path_means(model, cfg, pilots_a, /*a_to_b=*/true);
  mp.los = std::move(fwd.los);
  mp.reflected = std::move(fwd.reflected);
  if (is_stacked_variant(variant)) {
    LinkPathMeans rev = link_path_means(model, cfg, pilots_b, /*a_to_b=*/false);
    mp.blocks = 2;
    mp.los.reserve(2 * mp.n);
    for (const cplx& v : rev.los) mp.los.push_back(std::conj(v));
    if (model.two_path) {
      mp.reflected.reserve(2 * mp.n);
      for (const cplx& v : rev.reflected) mp.reflected.push_back(std::conj(v));
    }
  }
  return mp;
}

}  // namespace

std::vector<std::string> fim_parameter_labels(FimVariant variant,
                                              const MapKnowledge& map) {
  std::vector<std::string> labels;
  if (is_stacked_variant(variant)) labels.push_back("tau_ab");
  labels.push_back("clock_offset");
  labels.push_back("phase_offset");
  if (is_two_path_variant(variant)) {
    if (!map.reflected_delay_known) labels.push_back("tau_ar");
    if (!map.reflection_phase_known) labels.push_back("reflection_phase");
  }
  labels.push_back("gain_ab");
  if (is_two_path_variant(variant)) labels.push_back("gain_ar");
  return labels;
}

std::vector<std::complex<double>> mean_vector(const ChannelTruth& truth,
                                              const OfdmConfig& cfg,
                                              const PilotSequence& pilots_a,
                                              const PilotSequence& pilots_b,
                                              FimVariant variant) {
  MeanParts mp = build_parts(truth, cfg, pilots_a, pilots_b, variant);
  VecC mean = std::move(mp.los);
  for (std::size_t k = 0; k < mp.reflected.size(); ++k) mean[k] += mp.reflected[k];
  return mean;
}

std::vector<std::vector<std::complex<double>>> mean_derivatives(
    const ChannelTruth& truth, const OfdmConfig& cfg,
    const PilotSequence& pilots_a, const PilotSequence& pilots_b,
    FimVariant variant, const MapKnowledge& map) {
  const MeanParts mp = build_parts(truth, cfg, pilots_a, pilots_b, variant);
  const bool two = is_two_path_variant(variant);
  const int n = mp.n;
  const int total = n * mp.blocks;

  VecC mean(total);
  for (int k = 0; k < total; ++k) {
    mean[k] = mp.los[k] + (two ? mp.reflected[k] : cplx(0.0));
  }

  // Per-sample delay factor; the conjugated reverse block flips its sign for
  // parameters the conjugation acts on.
  auto dfac = [&](int k) { return delay_derivative_factor(cfg, k % n); };
  auto block_sign = [&](int k) { return (k < n) ? 1.0 : -1.0; };

  const double beta_ab = truth.los_gain(cfg.carrier_freq_hz);
  const double beta_ar =
      two ? truth.reflected_gain(cfg.carrier_freq_hz) : 0.0;

  std::vector<VecC> derivs;
  for (const std::string& label : fim_parameter_labels(variant, map)) {
    VecC d(total);
    if (label == "tau_ab") {
      // Both blocks see tau_AB through the pseudo delay; conjugation of the
      // reverse block flips the sign of its frequency factor.
      for (int k = 0; k < total; ++k) d[k] = block_sign(k) * dfac(k) * mp.los[k];
    } else if (label == "clock_offset") {
      // The clock offset adds to the forward pseudo delays and subtracts from
      // the reverse ones; together with the conjugation the sign flips twice,
      // so both blocks carry the same factor.
      for (int k = 0; k < total; ++k) d[k] = dfac(k) * mean[k];
    } else if (label == "phase_offset") {
      // e^{-j phi} in front of the forward block, e^{+j phi} on the reverse
      // one; conjugation makes the factor -j uniformly.
      for (int k = 0; k < total; ++k) d[k] = cplx(0.0, -1.0) * mean[k];
    } else if (label == "tau_ar") {
      for (int k = 0; k < total; ++k) {
        d[k] = block_sign(k) * dfac(k) * mp.reflected[k];
      }
    } else if (label == "reflection_phase") {
      // Direction-independent phase: -j on the forward block, +j on the
      // conjugated reverse block.
      for (int k = 0; k < total; ++k) {
        d[k] = cplx(0.0, -block_sign(k)) * mp.reflected[k];
      }
    } else if (label == "gain_ab") {
      for (int k = 0; k < total; ++k) d[k] = mp.los[k] / beta_ab;
    } else {  // gain_ar
      for (int k = 0; k < total; ++k) d[k] = mp.reflected[k] / beta_ar;
    }
    derivs.push_back(std::move(d));
  }
  return derivs;
}

Eigen::MatrixXd fim(
    const std::vector<std::vector<std::complex<double>>>& derivatives,
    double noise_psd_w_hz) {
  if (derivatives.empty()) throw ModelError("information matrix needs at least one parameter");
  if (!(noise_psd_w_hz > 0.0)) throw ConfigError("noise spectral density must be positive");
  const int p = static_cast<int>(derivatives.size());
  const std::size_t n = derivatives.front().size();
  for (const auto& d : derivatives) {
    if (d.size() != n) throw ModelError("derivative vectors have mismatched lengths");
  }
  Eigen::MatrixXd j(p, p);
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += (std::conj(derivatives[a][k]) * derivatives[b][k]).real();
      }
      j(a, b) = j(b, a) = 2.0 * acc / noise_psd_w_hz;
    }
  }
  return j;
}

CrlbReport crlb_numeric(const ChannelTruth& truth, const OfdmConfig& cfg,
                        const PilotSequence& pilots_a,
                        const PilotSequence& pilots_b, FimVariant variant,
                        const MapKnowledge& map) {
  CrlbReport report;
  report.variant = variant;
  report.labels = fim_parameter_labels(variant, map);
  report.information = fim(
      mean_derivatives(truth, cfg, pilots_a, pilots_b, variant, map),
      cfg.noise_psd_w_hz);
  report.snr_linear = linear_snr(cfg, truth.los_gain(cfg.carrier_freq_hz));

  // The parameters mix units (seconds, radians, amplitude), so the raw matrix
  // is ill-conditioned by scale alone. Normalize by the diagonal before
  // inverting; the identifiability gate then measures genuine parameter
  // coupling rather than unit disparity, and the inverse is reconstructed as
  // J^-1 = D (D J D)^-1 D with D = diag(1/sqrt(J_ii)).
  const int p = static_cast<int>(report.labels.size());
  Eigen::VectorXd d(p);
  for (int i = 0; i < p; ++i) {
    const double jii = report.information(i, i);
    if (!(jii > 0.0)) {
      throw ModelError(
          "parameters are not identifiable from this observation: zero "
          "information for " +
          report.labels[i]);
    }
    d(i) = 1.0 / std::sqrt(jii);
  }
  const Eigen::MatrixXd scaled =
      d.asDiagonal() * report.information * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of the information matrix failed");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double ev_min = ev.minCoeff();
  const double ev_max = ev.maxCoeff();
  report.condition = (ev_min > 0.0) ? ev_max / ev_min
                                    : std::numeric_limits<double>::infinity();
  if (!(ev_min > 0.0) || report.condition > 1e12) {
    throw ModelError(
        "parameters are not identifiable from this observation: information "
        "matrix condition exceeds 1e12");
  }
  report.variance.resize(p);
  const Eigen::MatrixXd& v = es.eigenvectors();
  for (int i = 0; i < p; ++i) {
    double acc = 0.0;
    for (int k = 0; k < p; ++k) acc += v(i, k) * v(i, k) / ev(k);
    report.variance(i) = acc * d(i) * d(i);
  }
  return report;
}

KnownPosLosBounds crlb_closed_form_known_pos_los(const OfdmConfig& cfg,
                                                 double snr_linear) {
  if (!(snr_linear > 0.0)) throw ConfigError("SNR must be positive");
  const double n = cfg.num_subcarriers;
  // Mean-square modulation bandwidth of the symmetric grid: df^2 (N^2 - 1)
  // equals 12 * variance of the subcarrier offsets; using it keeps the
  // expressions exact for any finite N.
  const double w2 = cfg.subcarrier_spacing_hz * cfg.subcarrier_spacing_hz *
                    (n * n - 1.0);
  const double fc2 = cfg.carrier_freq_hz * cfg.carrier_freq_hz;
  KnownPosLosBounds b;
  b.clock_offset_var_s2 = 3.0 / (2.0 * kPi * kPi * w2 * snr_linear);
  b.phase_offset_var_rad2 = 6.0 * fc2 / (w2 * snr_linear) + 1.0 / (2.0 * snr_linear);
  return b;
}

UnknownPosLosBounds crlb_closed_form_unknown_pos_los(const OfdmConfig& cfg,
                                                     double snr_linear) {
  if (!(snr_linear > 0.0)) throw ConfigError("SNR must be positive");
  const double n = cfg.num_subcarriers;
  const double w2 = cfg.subcarrier_spacing_hz * cfg.subcarrier_spacing_hz *
                    (n * n - 1.0);
  const double fc2 = cfg.carrier_freq_hz * cfg.carrier_freq_hz;
  UnknownPosLosBounds b;
  b.tau_ab_var_s2 =
      1.0 / ((16.0 * kPi * kPi * fc2 + (4.0 * kPi * kPi / 3.0) * w2) * snr_linear);
  b.clock_offset_var_s2 = 3.0 / (4.0 * kPi * kPi * w2 * snr_linear);
  b.phase_offset_var_rad2 = 3.0 * fc2 / (w2 * snr_linear) + 1.0 / (4.0 * snr_linear);
  return b;
}

}  // namespace apcal
