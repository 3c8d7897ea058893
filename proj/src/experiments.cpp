#include "apcal/experiments.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "apcal/config.hpp"
#include "apcal/errors.hpp"
#include "apcal/numeric.hpp"
#include "apcal/rng.hpp"

namespace apcal {
namespace {

bool kind_is_bi(EstimatorKind k) {
  return k == EstimatorKind::bi_los || k == EstimatorKind::bi_two_path;
}

bool kind_is_two_path(EstimatorKind k) {
  return k == EstimatorKind::uni_two_path || k == EstimatorKind::bi_two_path;
}

ParameterVector truth_parameters(const ScenarioConfig& sc) {
  ParameterVector p;
  p.tau_ab_s = sc.truth.los_delay_s();
  p.clock_offset_s = sc.truth.offsets.clock_offset_s;
  p.phase_offset_rad = sc.truth.offsets.phase_offset_rad;
  p.tau_ar_s = sc.truth.reflected_delay_s();
  p.reflection_phase_rad = sc.truth.reflection_phase_rad;
  p.gain_ab = sc.truth.los_gain(sc.carrier_freq_hz);
  p.gain_ar = sc.truth.reflected_gain(sc.carrier_freq_hz);
  return p;
}

// Run `work(0..total-1)` across a small thread pool with preassigned output
// slots; the caller's results are identical for every thread count.
void run_parallel(int total, int threads, const std::function<void(int)>& work) {
  threads = std::max(1, std::min(threads, total));
  if (threads <= 1) {
    for (int i = 0; i < total; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= total) break;
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

PilotSequence make_pilots(const ScenarioConfig& sc, const OfdmConfig& cfg,
                          std::uint64_t stream_seed) {
  if (sc.pilot_kind == PilotKind::qpsk) return qpsk_pilots(cfg, stream_seed);
  return constant_pilots(cfg);
}

}  // namespace

EstimatorKind scenario_estimator_kind(const ScenarioConfig& sc) {
  if (sc.direction == LinkDirection::uni_ab) {
    return sc.estimator_two_path ? EstimatorKind::uni_two_path
                                 : EstimatorKind::uni_los;
  }
  return sc.estimator_two_path ? EstimatorKind::bi_two_path
                               : EstimatorKind::bi_los;
}

void validate_scenario(const ScenarioConfig& sc) {
  if (sc.id == ScenarioId::unknown_positions &&
      sc.direction == LinkDirection::uni_ab) {
    throw ConfigError(
        "a single observation direction cannot separate the propagation delay "
        "from the clock offset; unknown-position scenarios require "
        "bidirectional observations");
  }
  if (sc.id == ScenarioId::known_positions &&
      sc.direction == LinkDirection::bidirectional) {
    throw ConfigError(
        "known-position scenarios are defined on the one-way link; use the "
        "unknown-positions scenario for bidirectional estimation");
  }
  // Exercise geometry constructors so degenerate layouts fail early.
  (void)sc.truth.los_delay_s();
  (void)sc.truth.reflected_delay_s();
}

TrialResult run_trial(const ScenarioConfig& sc, const GridSpec& grid,
                      double bandwidth_hz, std::uint64_t base_seed,
                      std::uint64_t bandwidth_index, std::uint64_t trial_index,
                      double center_jitter_m) {
  validate_scenario(sc);
  const OfdmConfig cfg =
      make_ofdm_config(sc.carrier_freq_hz, sc.subcarrier_spacing_hz,
                       bandwidth_hz, sc.tx_power_w, sc.noise_psd_w_hz);
  const PilotSequence pilots_a =
      make_pilots(sc, cfg, derive_seed(base_seed, bandwidth_index, trial_index, 2));
  const PilotSequence pilots_b =
      make_pilots(sc, cfg, derive_seed(base_seed, bandwidth_index, trial_index, 3));
  const ObservationSet obs =
      synth_observation(sc.truth, cfg, sc.direction, pilots_a, pilots_b,
                        derive_seed(base_seed, bandwidth_index, trial_index, 0));

  const EstimatorKind kind = scenario_estimator_kind(sc);
  SearchCenters centers;
  centers.tau_ab_s = sc.truth.los_delay_s();
  centers.clock_offset_s = sc.truth.offsets.clock_offset_s;
  centers.tau_ar_s = sc.truth.reflected_delay_s();
  centers.reflection_phase_rad = sc.truth.reflection_phase_rad;
  if (center_jitter_m > 0.0) {
    // Searched delay axes get independently jittered centers so grid nodes
    // fall at arbitrary offsets from the truth, as they would in the field.
    RandomStream js(derive_seed(base_seed, bandwidth_index, trial_index, 1));
    const double half_s = center_jitter_m / kSpeedOfLight;
    if (kind_is_bi(kind)) {
      centers.tau_ab_s += js.uniform(-half_s, half_s);
    }
    centers.clock_offset_s += js.uniform(-half_s, half_s);
    if (kind_is_two_path(kind) && !sc.map.reflected_delay_known) {
      centers.tau_ar_s += js.uniform(-half_s, half_s);
    }
  }

  TrialResult tr;
  tr.estimate = estimate(obs, kind, sc.map, centers, grid);
  tr.truth_params = truth_parameters(sc);
  return tr;
}

double wrapped_error(double estimate, double truth, double period) {
  const double raw = estimate - truth;
  if (period > 0.0) return wrap_to_period(raw, period);
  return raw;
}

std::vector<RmseRecord> run_sweep(const ScenarioConfig& sc, const GridSpec& grid,
                                  const SweepSpec& sweep, int threads) {
  validate_scenario(sc);
  if (sweep.bandwidths_hz.empty()) {
    throw ConfigError("sweep requires at least one bandwidth");
  }
  if (sweep.trials < 1) throw ConfigError("sweep requires at least one trial");

  const EstimatorKind kind = scenario_estimator_kind(sc);
  const bool bi = kind_is_bi(kind);
  const int nbw = static_cast<int>(sweep.bandwidths_hz.size());
  const int total = nbw * sweep.trials;
  std::vector<TrialResult> slots(total);
  run_parallel(total, threads, [&](int g) {
    const int b = g / sweep.trials;
    const int t = g % sweep.trials;
    slots[g] = run_trial(sc, grid, sweep.bandwidths_hz[b], sweep.base_seed,
                         static_cast<std::uint64_t>(b),
                         static_cast<std::uint64_t>(t), sweep.center_jitter_m);
  });

  std::vector<RmseRecord> records;
  for (int b = 0; b < nbw; ++b) {
    const OfdmConfig cfg =
        make_ofdm_config(sc.carrier_freq_hz, sc.subcarrier_spacing_hz,
                         sweep.bandwidths_hz[b], sc.tx_power_w, sc.noise_psd_w_hz);
    const double snr = linear_snr(cfg, sc.truth.los_gain(sc.carrier_freq_hz));

    // Reference bounds follow the estimator's channel hypothesis: closed
    // forms for the single-path families, the numeric bound otherwise.
    double std_tau = 0.0, std_clk = 0.0, std_phi = 0.0;
    if (sc.estimator_two_path && sc.truth.two_path) {
      const PilotSequence ref = constant_pilots(cfg);
      const FimVariant variant = bi ? FimVariant::unknown_pos_two_path
                                    : FimVariant::known_pos_two_path;
      const CrlbReport rep =
          crlb_numeric(sc.truth, cfg, ref, ref, variant, sc.map);
      for (std::size_t i = 0; i < rep.labels.size(); ++i) {
        if (rep.labels[i] == "tau_ab") std_tau = std::sqrt(rep.variance(i));
        if (rep.labels[i] == "clock_offset") std_clk = std::sqrt(rep.variance(i));
        if (rep.labels[i] == "phase_offset") std_phi = std::sqrt(rep.variance(i));
      }
    } else if (bi) {
      const UnknownPosLosBounds cb = crlb_closed_form_unknown_pos_los(cfg, snr);
      std_tau = std::sqrt(cb.tau_ab_var_s2);
      std_clk = std::sqrt(cb.clock_offset_var_s2);
      std_phi = std::sqrt(cb.phase_offset_var_rad2);
    } else {
      const KnownPosLosBounds cb = crlb_closed_form_known_pos_los(cfg, snr);
      std_clk = std::sqrt(cb.clock_offset_var_s2);
      std_phi = std::sqrt(cb.phase_offset_var_rad2);
    }

    double se_tau = 0.0, se_clk = 0.0, se_phi = 0.0;
    int degenerate = 0;
    for (int t = 0; t < sweep.trials; ++t) {
      const TrialResult& tr = slots[b * sweep.trials + t];
      const ParameterVector& est = tr.estimate.params;
      const ParameterVector& ref = tr.truth_params;
      if (bi) {
        const double e = est.tau_ab_s - ref.tau_ab_s;
        se_tau += e * e;
      }
      const double ec = est.clock_offset_s - ref.clock_offset_s;
      se_clk += ec * ec;
      const double ep = wrapped_error(est.phase_offset_rad, ref.phase_offset_rad,
                                      tr.estimate.phase_ambiguity_period_rad);
      se_phi += ep * ep;
      if (tr.estimate.gram_regularized || tr.estimate.negative_gain) ++degenerate;
    }
    const double inv_trials = 1.0 / sweep.trials;

    const double w_hz = cfg.bandwidth_hz();
    if (bi) {
      records.push_back({w_hz, "tau_ab", std::sqrt(se_tau * inv_trials), std_tau,
                         "s", sweep.trials, degenerate});
    }
    records.push_back({w_hz, "clock_offset", std::sqrt(se_clk * inv_trials),
                       std_clk, "s", sweep.trials, degenerate});
    records.push_back({w_hz, "phase_offset", std::sqrt(se_phi * inv_trials),
                       std_phi, "rad", sweep.trials, degenerate});
  }
  return records;
}

std::vector<std::pair<double, double>> nllf_profile(const ScenarioConfig& sc,
                                                    const ProfileSpec& spec) {
  validate_scenario(sc);
  if (spec.points < 2) throw ConfigError("profile needs at least two points");
  const EstimatorKind kind = scenario_estimator_kind(sc);
  const bool two = kind_is_two_path(kind);
  using Axis = ProfileSpec::Axis;
  if ((spec.axis == Axis::tau_ar || spec.axis == Axis::reflection_phase) && !two) {
    throw ConfigError("profile axis belongs to the two-path estimator only");
  }

  const OfdmConfig cfg =
      make_ofdm_config(sc.carrier_freq_hz, sc.subcarrier_spacing_hz,
                       sc.bandwidth_hz, sc.tx_power_w, sc.noise_psd_w_hz);
  PilotSequence pilots_a = make_pilots(sc, cfg, sc.pilot_seed);
  PilotSequence pilots_b = make_pilots(sc, cfg, derive_seed(sc.pilot_seed, 1));
  const ObservationSet obs = synth_observation(sc.truth, cfg, sc.direction,
                                               pilots_a, pilots_b, sc.noise_seed);

  const ParameterVector t = truth_parameters(sc);
  const double half = (spec.axis == Axis::reflection_phase) ? spec.half_width_rad
                                                            : spec.half_width_s;
  std::vector<std::pair<double, double>> out;
  out.reserve(spec.points);
  for (int i = 0; i < spec.points; ++i) {
    const double off = -half + (2.0 * half) * i / (spec.points - 1);
    double tau_ab = t.tau_ab_s, clk = t.clock_offset_s;
    double tau_ar = t.tau_ar_s, phi = t.reflection_phase_rad;
    switch (spec.axis) {
      case Axis::clock_offset: clk += off; break;
      case Axis::tau_ab: tau_ab += off; break;
      case Axis::tau_ar: tau_ar += off; break;
      case Axis::reflection_phase: phi += off; break;
    }
    double loss = 0.0;
    switch (kind) {
      case EstimatorKind::uni_los: loss = nllf_uni_los(obs, tau_ab, clk).loss; break;
      case EstimatorKind::uni_two_path:
        loss = nllf_uni_twopath(obs, tau_ab, clk, tau_ar, phi).loss;
        break;
      case EstimatorKind::bi_los: loss = nllf_bi_los(obs, tau_ab, clk).loss; break;
      case EstimatorKind::bi_two_path:
        loss = nllf_bi_twopath(obs, tau_ab, clk, tau_ar, phi).loss;
        break;
    }
    out.emplace_back(off, loss);
  }
  return out;
}

void write_rmse_csv(const std::string& path,
                    const std::vector<RmseRecord>& records) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << "w_hz,param,rmse,crlb_std,unit,trials,degenerate_count\n";
  for (const RmseRecord& r : records) {
    f << format_double(r.w_hz) << ',' << r.param << ',' << format_double(r.rmse)
      << ',' << format_double(r.crlb_std) << ',' << r.unit << ',' << r.trials
      << ',' << r.degenerate_count << '\n';
  }
  if (!f.good()) throw ConfigError("failed while writing: " + path);
}

void write_profile_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& samples,
                       const std::string& axis_name) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << axis_name << ",nllf\n";
  for (const auto& [x, v] : samples) {
    f << format_double(x) << ',' << format_double(v) << '\n';
  }
  if (!f.good()) throw ConfigError("failed while writing: " + path);
}

}  // namespace apcal
