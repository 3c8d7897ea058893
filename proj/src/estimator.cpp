#include "apcal/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "apcal/errors.hpp"
#include "apcal/numeric.hpp"

namespace apcal {
namespace {

using cplx = std::complex<double>;
using VecC = std::vector<cplx>;

// Gram-matrix regularization policy: a determinant at or below
// kGramDetFloor * trace^2 is treated as numerically singular and receives a
// diagonal loading of kGramRidge * trace (escalated x1000 up to twice more if
// that is still not enough).
constexpr double kGramDetFloor = 1e-12;
constexpr double kGramRidge = 1e-12;

bool is_bi(EstimatorKind k) {
  return k == EstimatorKind::bi_los || k == EstimatorKind::bi_two_path;
}

bool is_two_path(EstimatorKind k) {
  return k == EstimatorKind::uni_two_path || k == EstimatorKind::bi_two_path;
}

void check_obs(const ObservationSet& obs, EstimatorKind kind) {
  const int n = obs.cfg.num_subcarriers;
  if (n < 3 || n % 2 == 0) {
    throw ModelError("observation carries an invalid subcarrier grid (need an odd count >= 3)");
  }
  if (static_cast<int>(obs.y_ab.size()) != n ||
      static_cast<int>(obs.pilots_a.symbols.size()) != n) {
    throw ModelError("forward-link samples or pilots do not match the subcarrier count");
  }
  if (is_bi(kind)) {
    if (obs.direction != LinkDirection::bidirectional) {
      throw ModelError("bidirectional estimator requires observations of both link directions");
    }
    if (static_cast<int>(obs.y_ba.size()) != n ||
        static_cast<int>(obs.pilots_b.symbols.size()) != n) {
      throw ModelError("reverse-link samples or pilots do not match the subcarrier count");
    }
  }
}

// ---------------------------------------------------------------------------
// Concentration of amplitudes and the common phase offset.
//
// The model seen by every estimator is y ~ e^{-j phi} (b0 c0 + b1 c1) with
// real amplitudes b and one phase offset phi common to all components (for
// bidirectional kinds the reverse block is conjugated first, which flips its
// -phi into the common +... sign). Writing u_i = c_i^H y,
// G = Re{C^H C}, r = Re u, i = Im u, and
//   A = r^T G^-1 r,  B = i^T G^-1 i,  D = r^T G^-1 i,
// the residual minimized over b at fixed phi is
//   ||y||^2 - [ (A+B)/2 + ((A-B)/2) cos 2phi - D sin 2phi ],
// whose phase minimum is reached at phi = -atan2(D, (A-B)/2)/2 with value
//   ||y||^2 - ( (A+B)/2 + sqrt( ((A-B)/2)^2 + D^2 ) ).
// This holds for any C; no realness assumption on C^H C is needed.
// ---------------------------------------------------------------------------

struct Conc2 {
  double loss = 0.0;
  double cos2 = 0.0;  // (A-B)/2, the cos(2 phi) coefficient
  double sin2 = 0.0;  // D, the sin(2 phi) coefficient
  double g00 = 0.0, g11 = 0.0, g01 = 0.0;  // possibly ridged real Gram
  double det = 1.0;
  bool reg = false;
};

inline Conc2 concentrate2(double ny, cplx u0, cplx u1, double g00, double g11,
                          double g01) {
  Conc2 c;
  c.g00 = g00;
  c.g11 = g11;
  c.g01 = g01;
  const double tr = g00 + g11;
  double det = g00 * g11 - g01 * g01;
  if (!(det > kGramDetFloor * tr * tr)) {
    // Near-collinear components, e.g. the bounce-delay hypothesis crossing
    // the direct delay. Load the diagonal and flag the evaluation.
    double lambda = kGramRidge * tr;
    for (int attempt = 0; attempt < 3 && !(det > 0.0); ++attempt) {
      c.g00 += lambda;
      c.g11 += lambda;
      det = c.g00 * c.g11 - c.g01 * c.g01;
      lambda *= 1e3;
    }
    c.reg = true;
    if (!(det > 0.0)) {
      throw NumericError("component Gram matrix is singular beyond regularization");
    }
  }
  c.det = det;
  const double r0 = u0.real(), i0 = u0.imag();
  const double r1 = u1.real(), i1 = u1.imag();
  const double qa = (c.g11 * r0 * r0 - 2.0 * c.g01 * r0 * r1 + c.g00 * r1 * r1) / det;
  const double qb = (c.g11 * i0 * i0 - 2.0 * c.g01 * i0 * i1 + c.g00 * i1 * i1) / det;
  const double qd = (c.g11 * r0 * i0 - c.g01 * (r0 * i1 + r1 * i0) + c.g00 * r1 * i1) / det;
  c.cos2 = 0.5 * (qa - qb);
  c.sin2 = qd;
  c.loss = ny - (0.5 * (qa + qb) + std::sqrt(c.cos2 * c.cos2 + c.sin2 * c.sin2));
  return c;
}

inline double phase_from(const Conc2& c) {
  // -atan2/2 already lands in the canonical interval [-pi/2, pi/2).
  return -0.5 * std::atan2(c.sin2, c.cos2);
}

inline std::array<double, 2> gains_from(const Conc2& c, cplx u0, cplx u1,
                                        double phase) {
  const cplx e = cis(phase);
  const double b0 = (e * u0).real();
  const double b1 = (e * u1).real();
  return {(c.g11 * b0 - c.g01 * b1) / c.det, (c.g00 * b1 - c.g01 * b0) / c.det};
}

// Single-component concentration: loss = ||y||^2 - |u0|^2 / ||c0||^2.
inline NllfValue concentrate1(double ny, cplx u0, double g00) {
  if (!(g00 > 0.0)) {
    throw NumericError("model component has zero energy");
  }
  NllfValue v;
  v.loss = ny - std::norm(u0) / g00;
  v.phase_offset_rad = wrap_to_period(-std::arg(u0), kPi);
  v.gain0 = (cis(v.phase_offset_rad) * u0).real() / g00;
  v.gain1 = 0.0;
  return v;
}

// One block of a model component: cis(-2 pi f_c tau - extra) * steering(tau)
// elementwise with the pilots; conjugated wholesale for reverse-link blocks.
VecC component_block(const OfdmConfig& cfg, const PilotSequence& pilots,
                     double tau_s, double extra_phase_rad, bool conjugate) {
  VecC v = steering_vector(cfg, tau_s);
  const cplx scale = cis(-kTwoPi * cfg.carrier_freq_hz * tau_s - extra_phase_rad);
  for (int k = 0; k < cfg.num_subcarriers; ++k) {
    v[k] *= scale * pilots.symbols[k];
    if (conjugate) v[k] = std::conj(v[k]);
  }
  return v;
}

void append(VecC& dst, const VecC& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

cplx hdot(const VecC& a, const VecC& b) {  // a^H b
  cplx s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::conj(a[k]) * b[k];
  return s;
}

double sq_norm(const VecC& a) {
  double s = 0.0;
  for (const cplx& v : a) s += std::norm(v);
  return s;
}

// Direct (table-free) concentrated loss at one point; reference path for the
// grid engine and backbone of the public nllf_* functions.
NllfValue nllf_point(const ObservationSet& obs, EstimatorKind kind,
                     double tau_ab_s, double clock_offset_s, double tau_ar_s,
                     double reflection_phase_rad) {
  check_obs(obs, kind);
  const VecC y = stacked_observation(obs, kind);
  const ModelColumns cols = model_columns(obs, kind, tau_ab_s, clock_offset_s,
                                          tau_ar_s, reflection_phase_rad);
  const double ny = sq_norm(y);
  const cplx u0 = hdot(cols.col0, y);
  const double g00 = sq_norm(cols.col0);
  if (cols.col1.empty()) {
    return concentrate1(ny, u0, g00);
  }
  const cplx u1 = hdot(cols.col1, y);
  const double g11 = sq_norm(cols.col1);
  const double g01 = hdot(cols.col0, cols.col1).real();
  const Conc2 c = concentrate2(ny, u0, u1, g00, g11, g01);
  NllfValue v;
  v.loss = c.loss;
  v.phase_offset_rad = phase_from(c);
  const auto g = gains_from(c, u0, u1, v.phase_offset_rad);
  v.gain0 = g[0];
  v.gain1 = g[1];
  v.gram_regularized = c.reg;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public building blocks
// ---------------------------------------------------------------------------

std::vector<std::complex<double>> stacked_observation(const ObservationSet& obs,
                                                      EstimatorKind kind) {
  check_obs(obs, kind);
  VecC y = obs.y_ab;
  if (is_bi(kind)) {
    y.reserve(2 * y.size());
    for (const cplx& v : obs.y_ba) y.push_back(std::conj(v));
  }
  return y;
}

ModelColumns model_columns(const ObservationSet& obs, EstimatorKind kind,
                           double tau_ab_s, double clock_offset_s,
                           double tau_ar_s, double reflection_phase_rad) {
  check_obs(obs, kind);
  const OfdmConfig& cfg = obs.cfg;
  ModelColumns cols;
  cols.col0 = component_block(cfg, obs.pilots_a, tau_ab_s + clock_offset_s, 0.0,
                              /*conjugate=*/false);
  if (is_bi(kind)) {
    append(cols.col0, component_block(cfg, obs.pilots_b,
                                      tau_ab_s - clock_offset_s, 0.0,
                                      /*conjugate=*/true));
  }
  if (is_two_path(kind)) {
    cols.col1 = component_block(cfg, obs.pilots_a, tau_ar_s + clock_offset_s,
                                reflection_phase_rad, /*conjugate=*/false);
    if (is_bi(kind)) {
      append(cols.col1, component_block(cfg, obs.pilots_b,
                                        tau_ar_s - clock_offset_s,
                                        reflection_phase_rad,
                                        /*conjugate=*/true));
    }
  }
  return cols;
}

NllfValue nllf_uni_los(const ObservationSet& obs, double tau_ab_s,
                       double clock_offset_s) {
  return nllf_point(obs, EstimatorKind::uni_los, tau_ab_s, clock_offset_s, 0.0, 0.0);
}

NllfValue nllf_uni_twopath(const ObservationSet& obs, double tau_ab_s,
                           double clock_offset_s, double tau_ar_s,
                           double reflection_phase_rad) {
  return nllf_point(obs, EstimatorKind::uni_two_path, tau_ab_s, clock_offset_s,
                    tau_ar_s, reflection_phase_rad);
}

NllfValue nllf_bi_los(const ObservationSet& obs, double tau_ab_s,
                      double clock_offset_s) {
  return nllf_point(obs, EstimatorKind::bi_los, tau_ab_s, clock_offset_s, 0.0, 0.0);
}

NllfValue nllf_bi_twopath(const ObservationSet& obs, double tau_ab_s,
                          double clock_offset_s, double tau_ar_s,
                          double reflection_phase_rad) {
  return nllf_point(obs, EstimatorKind::bi_two_path, tau_ab_s, clock_offset_s,
                    tau_ar_s, reflection_phase_rad);
}

ConcentratedPair concentrate_pair(const ModelColumns& cols,
                                  const std::vector<std::complex<double>>& y) {
  if (cols.col0.size() != y.size()) {
    throw ModelError("component/observation length mismatch");
  }
  const bool two = !cols.col1.empty();
  const cplx u0 = hdot(cols.col0, y);
  const double g00 = sq_norm(cols.col0);
  cplx z0, z1, w0, w1;
  if (!two) {
    if (!(g00 > 0.0)) throw NumericError("model component has zero energy");
    z0 = u0 / g00;
    w0 = std::conj(u0) / g00;
  } else {
    const cplx u1 = hdot(cols.col1, y);
    const double g11 = sq_norm(cols.col1);
    const cplx g01 = hdot(cols.col0, cols.col1);  // full complex Gram entry
    double det = g00 * g11 - std::norm(g01);
    const double tr = g00 + g11;
    double d0 = g00, d1 = g11;
    if (!(det > kGramDetFloor * tr * tr)) {
      double lambda = kGramRidge * tr;
      for (int attempt = 0; attempt < 3 && !(det > 0.0); ++attempt) {
        d0 += lambda;
        d1 += lambda;
        det = d0 * d1 - std::norm(g01);
        lambda *= 1e3;
      }
      if (!(det > 0.0)) {
        throw NumericError("component Gram matrix is singular beyond regularization");
      }
    }
    z0 = (d1 * u0 - g01 * u1) / det;
    z1 = (d0 * u1 - std::conj(g01) * u0) / det;
    const cplx cu0 = std::conj(u0), cu1 = std::conj(u1);
    w0 = (d1 * cu0 - g01 * cu1) / det;
    w1 = (d0 * cu1 - std::conj(g01) * cu0) / det;
  }
  ConcentratedPair pair;
  pair.y_part.resize(y.size());
  pair.c_part.resize(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    cplx proj = z0 * cols.col0[k];
    cplx img = w0 * cols.col0[k];
    if (two) {
      proj += z1 * cols.col1[k];
      img += w1 * cols.col1[k];
    }
    pair.y_part[k] = y[k] - 0.5 * proj;
    pair.c_part[k] = 0.5 * img;
  }
  return pair;
}

PhaseRecovery recover_phase_offset(const ConcentratedPair& pair) {
  if (pair.y_part.size() != pair.c_part.size()) {
    throw ModelError("concentrated pair has mismatched lengths");
  }
  const cplx inner = hdot(pair.c_part, pair.y_part);
  PhaseRecovery out;
  if (!(std::abs(inner) > 0.0) || !std::isfinite(std::abs(inner))) {
    out.defined = false;
    out.phase_offset_rad = 0.0;
    return out;
  }
  out.phase_offset_rad = wrap_to_period(-0.5 * std::arg(inner), kPi);
  return out;
}

std::array<double, 2> recover_gains(const ModelColumns& cols,
                                    const std::vector<std::complex<double>>& y,
                                    double phase_offset_rad, bool* regularized) {
  if (cols.col0.size() != y.size()) {
    throw ModelError("component/observation length mismatch");
  }
  const cplx u0 = hdot(cols.col0, y);
  const double g00 = sq_norm(cols.col0);
  if (cols.col1.empty()) {
    if (!(g00 > 0.0)) throw NumericError("model component has zero energy");
    if (regularized) *regularized = false;
    return {(cis(phase_offset_rad) * u0).real() / g00, 0.0};
  }
  const cplx u1 = hdot(cols.col1, y);
  const double g11 = sq_norm(cols.col1);
  const double g01 = hdot(cols.col0, cols.col1).real();
  const Conc2 c = concentrate2(0.0, u0, u1, g00, g11, g01);
  if (regularized) *regularized = c.reg;
  return gains_from(c, u0, u1, phase_offset_rad);
}

// ---------------------------------------------------------------------------
// Grid search engine
//
// All delay axes of one refinement level share a single step h, so sums and
// differences of axis values again live on uniform grids. The per-point loss
// then needs only precomputed correlations
//   F(+/-)(z, tau) = [e^{+/- j 2 pi f_c tau}] * sum_k z_k e^{+/- j 2 pi n_k df tau}
// on those grids (z = pilot-matched observation products; the carrier factor
// is kept for the direct-path tables and supplied separately for the bounce),
// plus a closed-form expression for the Gram cross term, making each grid
// point O(1).
//
// The bounce-phase axis is searched in carrier-detuned coordinates
//   psi = phi_AR + 2 pi f_c tau_AR.
// The concentrated loss is envelope-smooth in (tau_AR, psi), so shrinking
// per-axis refinement windows can track the minimum; in raw phi_AR
// coordinates a tau_AR move of one step h would demand a phase jump of
// 2 pi f_c h, far outside any shrunken phase window, freezing tau_AR at its
// coarse-level cell. Reported estimates convert back to phi_AR.
// ---------------------------------------------------------------------------

namespace {

struct EngineData {
  const ObservationSet* obs = nullptr;
  EstimatorKind kind = EstimatorKind::uni_los;
  bool bi = false, two = false;
  int n = 0;
  int half_span = 0;
  double fc = 0.0, df = 0.0;
  double ny = 0.0;    // ||stacked y||^2
  double dd = 0.0;    // per-column Gram diagonal (equal for both columns)
  double es = 0.0;    // per-block symbol energy
  int blocks = 1;
  VecC za;  // conj(pilots_a) .* y_ab
  VecC zb;  // pilots_b .* conj(y_ba)
};

EngineData build_engine(const ObservationSet& obs, EstimatorKind kind) {
  EngineData e;
  e.obs = &obs;
  e.kind = kind;
  e.bi = is_bi(kind);
  e.two = is_two_path(kind);
  e.n = obs.cfg.num_subcarriers;
  e.half_span = obs.cfg.half_span();
  e.fc = obs.cfg.carrier_freq_hz;
  e.df = obs.cfg.subcarrier_spacing_hz;

  // The closed-form Gram cross term assumes constant-modulus pilots with the
  // same per-symbol energy on both links; verify rather than assume.
  double pa_min = std::numeric_limits<double>::infinity(), pa_max = 0.0;
  double pa2 = 0.0;
  for (const cplx& s : obs.pilots_a.symbols) {
    const double m2 = std::norm(s);
    pa_min = std::min(pa_min, m2);
    pa_max = std::max(pa_max, m2);
    pa2 += m2;
  }
  if (!(pa_min > 0.0) || pa_max - pa_min > 1e-9 * (pa2 / e.n)) {
    throw ModelError("grid search requires constant-modulus pilots");
  }
  e.es = pa2 / e.n;
  e.dd = pa2;
  e.ny = sq_norm(obs.y_ab);
  e.za.resize(e.n);
  for (int k = 0; k < e.n; ++k) {
    e.za[k] = std::conj(obs.pilots_a.symbols[k]) * obs.y_ab[k];
  }
  if (e.bi) {
    double pb_min = std::numeric_limits<double>::infinity(), pb_max = 0.0;
    double pb2 = 0.0;
    for (const cplx& s : obs.pilots_b.symbols) {
      const double m2 = std::norm(s);
      pb_min = std::min(pb_min, m2);
      pb_max = std::max(pb_max, m2);
      pb2 += m2;
    }
    if (!(pb_min > 0.0) || pb_max - pb_min > 1e-9 * (pb2 / e.n) ||
        std::abs(pb2 - pa2) > 1e-9 * pa2) {
      throw ModelError("grid search requires matched constant-modulus pilots on both links");
    }
    e.dd += pb2;
    e.ny += sq_norm(obs.y_ba);
    e.zb.resize(e.n);
    for (int k = 0; k < e.n; ++k) {
      e.zb[k] = obs.pilots_b.symbols[k] * std::conj(obs.y_ba[k]);
    }
    e.blocks = 2;
  }
  return e;
}

// Envelope correlation over a uniform delay grid, optionally including the
// carrier phase factor e^{sign j 2 pi f_c tau}.
std::vector<cplx> correlation_table(const EngineData& e, const VecC& z,
                                    double base, double step, int count,
                                    double sign, bool carrier) {
  std::vector<cplx> t(count);
  for (int m = 0; m < count; ++m) {
    const double tau = base + m * step;
    const double ang = sign * kTwoPi * e.df * tau;
    const cplx rot = cis(ang);
    cplx cur = cis(-ang * e.half_span);
    cplx acc = 0.0;
    for (int k = 0; k < e.n; ++k) {
      acc += z[k] * cur;
      cur *= rot;
      if ((k & 1023) == 1023) cur /= std::abs(cur);  // keep the phasor on the circle
    }
    t[m] = carrier ? cis(sign * kTwoPi * e.fc * tau) * acc : acc;
  }
  return t;
}

struct AxisValues {
  std::vector<double> values;
  bool searched = false;
};

AxisValues fixed_axis(double value) {
  AxisValues a;
  a.values = {value};
  return a;
}

AxisValues ranged_axis(double center, int nh, double step) {
  AxisValues a;
  a.searched = true;
  a.values.resize(2 * nh + 1);
  for (int i = 0; i <= 2 * nh; ++i) a.values[i] = center + (i - nh) * step;
  return a;
}

struct BestPoint {
  double loss = std::numeric_limits<double>::infinity();
  double tau_ab = 0.0, clock = 0.0, tau_ar = 0.0, phi = 0.0;
  bool reg = false;
};

// Fixed scan order tau_ab -> clock -> tau_ar -> phase with strictly-lower
// replacement: ties resolve to the lexicographically first candidate, and the
// carried-over best from previous levels survives exact re-evaluation.
//
// ax_phi carries detuned psi values when the bounce phase is searched; when
// it is pinned (surveyed map), pinned_phi supplies the raw phi_AR and the
// phase axis collapses to the per-candidate psi it implies. best.phi stores
// whichever representation was scanned.
void scan_level(const EngineData& e, const AxisValues& ax_tau, const AxisValues& ax_clk,
                const AxisValues& ax_tar, const AxisValues& ax_phi,
                const double* pinned_phi, double delay_step,
                BestPoint& best, std::uint64_t& evals) {
  const int na = static_cast<int>(ax_tau.values.size());
  const int nc = static_cast<int>(ax_clk.values.size());
  const int nr = static_cast<int>(ax_tar.values.size());
  const int np = static_cast<int>(ax_phi.values.size());
  const double ta0 = ax_tau.values.front();
  const double tc0 = ax_clk.values.front();

  const auto fa_ab = correlation_table(e, e.za, ta0 + tc0, delay_step,
                                       na + nc - 1, +1.0, true);
  std::vector<cplx> fb_ab;
  if (e.bi) {
    fb_ab = correlation_table(e, e.zb, ta0 - tc0 - (nc - 1) * delay_step,
                              delay_step, na + nc - 1, -1.0, true);
  }
  std::vector<cplx> fa_ar, fb_ar;
  std::vector<double> cross_env;
  std::vector<cplx> phase_rot(np), tau_rot, clk_rot;
  if (e.two) {
    const double tr0 = ax_tar.values.front();
    fa_ar = correlation_table(e, e.za, tr0 + tc0, delay_step, nr + nc - 1,
                              +1.0, false);
    if (e.bi) {
      fb_ar = correlation_table(e, e.zb, tr0 - tc0 - (nc - 1) * delay_step,
                                delay_step, nr + nc - 1, -1.0, false);
    }
    // Gram cross-term envelope over the uniform grid of delay differences
    // delta = tau_bounce - tau_direct; the carrier part of the cross term,
    // cos(psi - 2 pi f_c tau_AB), is assembled per point from unit phasors.
    cross_env.resize(nr + na - 1);
    const double delta0 = tr0 - ta0 - (na - 1) * delay_step;
    for (int m = 0; m < nr + na - 1; ++m) {
      cross_env[m] = e.es * dirichlet_ratio(e.n, e.df, delta0 + m * delay_step);
    }
    for (int l = 0; l < np; ++l) phase_rot[l] = cis(ax_phi.values[l]);
    tau_rot.resize(na);
    for (int i = 0; i < na; ++i) {
      tau_rot[i] = cis(kTwoPi * e.fc * ax_tau.values[i]);
    }
    clk_rot.resize(nc);
    for (int j = 0; j < nc; ++j) {
      clk_rot[j] = cis(kTwoPi * e.fc * ax_clk.values[j]);
    }
  }

  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nc; ++j) {
      cplx u0 = fa_ab[i + j];
      if (e.bi) u0 += fb_ab[i - j + (nc - 1)];
      if (!e.two) {
        const double loss = e.ny - std::norm(u0) / e.dd;
        ++evals;
        if (loss < best.loss) {
          best.loss = loss;
          best.tau_ab = ax_tau.values[i];
          best.clock = ax_clk.values[j];
          best.reg = false;
        }
        continue;
      }
      for (int k = 0; k < nr; ++k) {
        const cplx p = fa_ar[k + j];
        const cplx q = e.bi ? fb_ar[k - j + (nc - 1)] : cplx(0.0);
        const double ce = e.blocks * cross_env[k - i + (na - 1)];
        cplx pinned_rot;
        if (pinned_phi) {
          pinned_rot = cis(*pinned_phi + kTwoPi * e.fc * ax_tar.values[k]);
        }
        for (int l = 0; l < np; ++l) {
          const cplx ph = pinned_phi ? pinned_rot : phase_rot[l];
          cplx u1 = ph * p;
          if (e.bi) u1 += std::conj(ph) * q;
          u1 *= clk_rot[j];
          const double g01 =
              ce * (ph.real() * tau_rot[i].real() + ph.imag() * tau_rot[i].imag());
          const Conc2 c = concentrate2(e.ny, u0, u1, e.dd, e.dd, g01);
          ++evals;
          if (c.loss < best.loss) {
            best.loss = c.loss;
            best.tau_ab = ax_tau.values[i];
            best.clock = ax_clk.values[j];
            best.tau_ar = ax_tar.values[k];
            best.phi = pinned_phi ? *pinned_phi : ax_phi.values[l];
            best.reg = c.reg;
          }
        }
      }
    }
  }
}

int level0_points(double half, double step) {
  return std::max(2, static_cast<int>(std::ceil(half / step - 1e-9)));
}

void validate_grid(const GridSpec& g) {
  if (g.refinement_levels < 0 || g.refinement_levels > 12) {
    throw ConfigError("refinement level count must lie in [0, 12]");
  }
  if (!(g.shrink_factor > 0.0) || !(g.shrink_factor < 1.0)) {
    throw ConfigError("grid shrink factor must lie in (0, 1)");
  }
  if (!(g.delay_step_fraction > 0.0) || g.delay_step_fraction > 1.0) {
    throw ConfigError("delay step fraction must lie in (0, 1]");
  }
  if (!(g.phase_step_rad > 0.0) || g.phase_step_rad > kPi / 2) {
    throw ConfigError("phase step must lie in (0, pi/2]");
  }
  if (!(g.clock_half_width_s > 0.0) || !(g.tau_ab_half_width_s > 0.0) ||
      !(g.tau_ar_half_width_s > 0.0)) {
    throw ConfigError("grid half-widths must be positive");
  }
}

}  // namespace

EstimateResult estimate(const ObservationSet& obs, EstimatorKind kind,
                        const MapKnowledge& map, const SearchCenters& centers,
                        const GridSpec& grid) {
  validate_grid(grid);
  const EngineData e = build_engine(obs, kind);

  const bool search_tau_ab = e.bi;
  const bool search_tau_ar = e.two && !map.reflected_delay_known;
  const bool search_phi = e.two && !map.reflection_phase_known;

  // Level-0 steps. Delay axes share one step: a fraction of the envelope
  // resolution 1/W, tightened so the narrowest searched axis still gets at
  // least two cells per side. The experimental 4-D search caps the axis sizes
  // instead, accepting a coarser first pass.
  double min_half = grid.clock_half_width_s;
  double max_half = grid.clock_half_width_s;
  if (search_tau_ab) {
    min_half = std::min(min_half, grid.tau_ab_half_width_s);
    max_half = std::max(max_half, grid.tau_ab_half_width_s);
  }
  if (search_tau_ar) {
    min_half = std::min(min_half, grid.tau_ar_half_width_s);
    max_half = std::max(max_half, grid.tau_ar_half_width_s);
  }
  double h = std::min(grid.delay_step_fraction / obs.cfg.bandwidth_hz(),
                      0.5 * min_half);
  double ph = grid.phase_step_rad;
  if (kind == EstimatorKind::bi_two_path) {
    h = std::max(h, max_half / 20.0);
    ph = std::max(ph, kTwoPi / 48.0);
  }

  EstimateResult res;
  res.kind = kind;
  res.coarse_only = (kind == EstimatorKind::bi_two_path);
  res.phase_ambiguity_period_rad = kPi;

  BestPoint best;
  best.tau_ab = centers.tau_ab_s;
  best.clock = centers.clock_offset_s;
  best.tau_ar = centers.tau_ar_s;
  best.phi = search_phi ? 0.0 : centers.reflection_phase_rad;

  const int refine_nh =
      std::max(2, static_cast<int>(std::ceil(1.0 / grid.shrink_factor - 1e-9)));

  for (int level = 0; level <= grid.refinement_levels; ++level) {
    AxisValues ax_tau, ax_clk, ax_tar, ax_phi;
    if (level == 0) {
      ax_tau = search_tau_ab
                   ? ranged_axis(centers.tau_ab_s,
                                 level0_points(grid.tau_ab_half_width_s, h), h)
                   : fixed_axis(centers.tau_ab_s);
      ax_clk = ranged_axis(centers.clock_offset_s,
                           level0_points(grid.clock_half_width_s, h), h);
      ax_tar = search_tau_ar
                   ? ranged_axis(centers.tau_ar_s,
                                 level0_points(grid.tau_ar_half_width_s, h), h)
                   : fixed_axis(e.two ? centers.tau_ar_s : 0.0);
      // The phase axis covers the full circle in the detuned coordinate
      // psi = phi_AR + 2 pi f_c tau_AR; a pinned phase is handed to the
      // scanner raw and the axis collapses to a placeholder.
      ax_phi = search_phi
                   ? ranged_axis(0.0,
                                 static_cast<int>(std::ceil(kPi / ph - 1e-9)), ph)
                   : fixed_axis(0.0);
    } else {
      h *= grid.shrink_factor;
      ph *= grid.shrink_factor;
      ax_tau = search_tau_ab ? ranged_axis(best.tau_ab, refine_nh, h)
                             : fixed_axis(centers.tau_ab_s);
      ax_clk = ranged_axis(best.clock, refine_nh, h);
      ax_tar = search_tau_ar ? ranged_axis(best.tau_ar, refine_nh, h)
                             : fixed_axis(e.two ? centers.tau_ar_s : 0.0);
      // Unresolved-path interference couples the optimal detuned phase to the
      // delays with slope of order 2 pi W, so as the delay combs refine, the
      // conditionally optimal psi drifts by up to that slope times the comb
      // remainder. Floor the phase step so the psi window keeps covering the
      // drift; the point count per level is fixed, so this costs nothing.
      const double ph_level =
          std::max(ph, kTwoPi * obs.cfg.bandwidth_hz() * h);
      ax_phi = search_phi ? ranged_axis(best.phi, refine_nh, ph_level)
                          : fixed_axis(0.0);
    }
    const double* pinned_phi =
        (e.two && !search_phi) ? &centers.reflection_phase_rad : nullptr;
    scan_level(e, ax_tau, ax_clk, ax_tar, ax_phi, pinned_phi, h, best,
               res.nllf_evaluations);
    res.level_minima.push_back(best.loss);
  }

  // best.phi holds the detuned psi when the phase was searched; convert back
  // to the raw bounce phase before reporting and final evaluation.
  const double actual_phi =
      !e.two ? 0.0
             : (search_phi ? best.phi - kTwoPi * e.fc * best.tau_ar
                           : centers.reflection_phase_rad);

  // Recover the concentrated quantities at the winning point via the direct
  // evaluation path.
  NllfValue v = nllf_point(obs, kind, best.tau_ab, best.clock, best.tau_ar,
                           actual_phi);
  // The bounce term is invariant under jointly flipping its amplitude sign
  // and shifting its phase by pi, so when that phase was estimated, report
  // the representative with nonnegative amplitude. With a pinned phase the
  // sign is informative and is left alone.
  double report_phi = actual_phi;
  if (search_phi && v.gain1 < 0.0) {
    v.gain1 = -v.gain1;
    report_phi += kPi;
  }
  res.nllf_at_min = best.loss;
  res.params.tau_ab_s = best.tau_ab;
  res.params.clock_offset_s = best.clock;
  res.params.phase_offset_rad = v.phase_offset_rad;
  res.params.tau_ar_s = e.two ? best.tau_ar : 0.0;
  res.params.reflection_phase_rad = e.two ? wrap_pm_pi(report_phi) : 0.0;
  res.params.gain_ab = v.gain0;
  res.params.gain_ar = v.gain1;
  res.gram_regularized = best.reg || v.gram_regularized;
  // The common-phase branch is canonical (period pi), so a negative direct
  // amplitude is substantive; likewise a negative bounce amplitude against a
  // pinned bounce phase.
  res.negative_gain =
      (v.gain0 < 0.0) || (e.two && !search_phi && v.gain1 < 0.0);
  return res;
}

}  // namespace apcal
