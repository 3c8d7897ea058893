// apcal command-line tool: synthesize calibration observations, run the
// grid-refined maximum-likelihood estimators, evaluate estimation-variance
// bounds, and reproduce the RMSE-versus-bandwidth and loss-profile
// experiments. Every command reads one JSON config (all fields optional) and
// writes its outputs plus a provenance manifest into --out.
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "apcal/config.hpp"
#include "apcal/constants.hpp"
#include "apcal/crlb.hpp"
#include "apcal/errors.hpp"
#include "apcal/estimator.hpp"
#include "apcal/experiments.hpp"
#include "apcal/observation.hpp"
#include "apcal/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

void add_common(CLI::App* sub, CommonOpts* o) {
  sub->add_option("--config", o->config_path,
                  "JSON configuration file; '-' reads stdin; omit for the "
                  "built-in desk-scale defaults");
  sub->add_option("--out", o->out_dir, "Output directory (created if missing)")
      ->capture_default_str();
  sub->add_option("--seed", o->seed,
                  "Override the run seed (noise seed for simulate/profile, "
                  "base seed for sweep)");
  sub->add_option("--threads", o->threads,
                  "Worker threads for sweep (default: hardware concurrency)");
}

int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

apcal::AppConfig load_config(const CommonOpts& o,
                             std::vector<std::string>* warnings) {
  if (o.config_path.empty()) return apcal::parse_config(json::object(), warnings);
  return apcal::parse_config_file(o.config_path, warnings);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::string out_path(const CommonOpts& o, const std::string& name) {
  fs::path dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
  fs::create_directories(dir);
  return (dir / name).string();
}

apcal::OfdmConfig scenario_ofdm(const apcal::ScenarioConfig& sc) {
  return apcal::make_ofdm_config(sc.carrier_freq_hz, sc.subcarrier_spacing_hz,
                                 sc.bandwidth_hz, sc.tx_power_w,
                                 sc.noise_psd_w_hz);
}

std::pair<apcal::PilotSequence, apcal::PilotSequence> scenario_pilots(
    const apcal::ScenarioConfig& sc, const apcal::OfdmConfig& cfg) {
  if (sc.pilot_kind == apcal::PilotKind::constant) {
    auto p = apcal::constant_pilots(cfg);
    return {p, p};
  }
  return {apcal::qpsk_pilots(cfg, sc.pilot_seed),
          apcal::qpsk_pilots(cfg, apcal::derive_seed(sc.pilot_seed, 1, 0, 0))};
}

apcal::SearchCenters centers_from_truth(const apcal::ScenarioConfig& sc) {
  apcal::SearchCenters c;
  c.tau_ab_s = sc.truth.los_delay_s();
  c.clock_offset_s = sc.truth.offsets.clock_offset_s;
  c.tau_ar_s = sc.truth.reflected_delay_s();
  c.reflection_phase_rad = sc.truth.reflection_phase_rad;
  return c;
}

void write_run_manifest(const CommonOpts& o, const std::string& command,
                        const apcal::AppConfig& cfg, std::uint64_t base_seed,
                        int threads, const std::vector<std::string>& outputs,
                        const std::vector<std::string>& warnings) {
  apcal::RunManifest m;
  m.command = command;
  m.tool_version = kVersion;
  m.resolved_config = cfg;
  m.base_seed = base_seed;
  m.threads = threads;
  m.outputs = outputs;
  m.warnings = warnings;
  apcal::write_manifest(out_path(o, "manifest.json"), m);
}

std::string unit_for_label(const std::string& label) {
  if (label == "tau_ab" || label == "clock_offset" || label == "tau_ar")
    return "s";
  if (label == "phase_offset" || label == "reflection_phase") return "rad";
  return "1";  // dimensionless amplitude gains
}

// ---------------------------------------------------------------------------

int run_simulate(const CommonOpts& o) {
  std::vector<std::string> warnings;
  apcal::AppConfig cfg = load_config(o, &warnings);
  print_warnings(warnings);
  if (o.seed) cfg.scenario.noise_seed = *o.seed;
  apcal::validate_scenario(cfg.scenario);

  const apcal::OfdmConfig ofdm = scenario_ofdm(cfg.scenario);
  auto [pa, pb] = scenario_pilots(cfg.scenario, ofdm);
  apcal::ObservationSet obs =
      apcal::synth_observation(cfg.scenario.truth, ofdm, cfg.scenario.direction,
                               pa, pb, cfg.scenario.noise_seed);

  const std::string obs_file = out_path(o, "observation.json");
  apcal::write_observation_file(obs_file, obs);
  write_run_manifest(o, "simulate", cfg, cfg.scenario.noise_seed.value_or(0), 1,
                     {obs_file}, warnings);

  std::cout << "wrote " << obs_file << " (" << obs.cfg.num_subcarriers
            << " subcarriers, "
            << (obs.direction == apcal::LinkDirection::bidirectional
                    ? "bidirectional"
                    : "one-way")
            << (cfg.scenario.noise_seed ? ", noisy)" : ", noiseless)")
            << "\n";
  return 0;
}

int run_estimate(const CommonOpts& o, const std::string& obs_path) {
  std::vector<std::string> warnings;
  apcal::AppConfig cfg = load_config(o, &warnings);
  print_warnings(warnings);
  apcal::validate_scenario(cfg.scenario);

  apcal::ObservationSet obs = apcal::read_observation_file(obs_path);
  const apcal::OfdmConfig expect = scenario_ofdm(cfg.scenario);
  if (obs.cfg.num_subcarriers != expect.num_subcarriers ||
      std::abs(obs.cfg.carrier_freq_hz - expect.carrier_freq_hz) >
          1e-6 * expect.carrier_freq_hz ||
      std::abs(obs.cfg.subcarrier_spacing_hz - expect.subcarrier_spacing_hz) >
          1e-6 * expect.subcarrier_spacing_hz) {
    throw apcal::ModelError(
        "observation file does not match the configured grid (file: N=" +
        std::to_string(obs.cfg.num_subcarriers) +
        ", config: N=" + std::to_string(expect.num_subcarriers) + ")");
  }
  const apcal::EstimatorKind kind = apcal::scenario_estimator_kind(cfg.scenario);
  const bool need_bi = kind == apcal::EstimatorKind::bi_los ||
                       kind == apcal::EstimatorKind::bi_two_path;
  if (need_bi != (obs.direction == apcal::LinkDirection::bidirectional)) {
    throw apcal::ModelError(
        "observation direction does not match the configured estimator "
        "(bidirectional estimators need both link directions)");
  }

  apcal::EstimateResult result =
      apcal::estimate(obs, kind, cfg.scenario.map, centers_from_truth(cfg.scenario),
                      cfg.grid);

  const std::string est_file = out_path(o, "estimate.json");
  json j = apcal::estimate_to_json(result);
  j["observation_file"] = obs_path;
  std::ofstream f(est_file);
  f << j.dump(2) << "\n";
  if (!f) throw apcal::ConfigError("cannot write " + est_file);
  write_run_manifest(o, "estimate", cfg, 0, 1, {est_file}, warnings);

  std::cout << "clock offset:  " << apcal::format_double(result.params.clock_offset_s)
            << " s\n"
            << "phase offset:  "
            << apcal::format_double(result.params.phase_offset_rad)
            << " rad (ambiguous modulo "
            << apcal::format_double(result.phase_ambiguity_period_rad) << ")\n";
  if (need_bi)
    std::cout << "tau_ab:        " << apcal::format_double(result.params.tau_ab_s)
              << " s\n";
  std::cout << "loss at min:   " << apcal::format_double(result.nllf_at_min)
            << " (" << result.nllf_evaluations << " evaluations)\n";
  std::cout << "wrote " << est_file << "\n";
  return 0;
}

int run_crlb(const CommonOpts& o) {
  std::vector<std::string> warnings;
  apcal::AppConfig cfg = load_config(o, &warnings);
  print_warnings(warnings);
  apcal::validate_scenario(cfg.scenario);
  const apcal::ScenarioConfig& sc = cfg.scenario;

  apcal::FimVariant variant;
  if (sc.id == apcal::ScenarioId::known_positions)
    variant = sc.estimator_two_path ? apcal::FimVariant::known_pos_two_path
                                    : apcal::FimVariant::known_pos_los;
  else
    variant = sc.estimator_two_path ? apcal::FimVariant::unknown_pos_two_path
                                    : apcal::FimVariant::unknown_pos_los;

  const apcal::OfdmConfig ofdm = scenario_ofdm(sc);
  // The information matrix is invariant to the phases of constant-modulus
  // pilots, so the bound is evaluated with the constant sequence.
  apcal::PilotSequence pilots = apcal::constant_pilots(ofdm);
  apcal::CrlbReport report =
      apcal::crlb_numeric(sc.truth, ofdm, pilots, pilots, variant, sc.map);

  std::vector<std::string> units;
  units.reserve(report.labels.size());
  for (const auto& label : report.labels) units.push_back(unit_for_label(label));
  json j = apcal::crlb_to_json(report, units);

  if (!sc.estimator_two_path) {
    json closed = json::object();
    if (sc.id == apcal::ScenarioId::known_positions) {
      auto b = apcal::crlb_closed_form_known_pos_los(ofdm, report.snr_linear);
      closed["clock_offset"] = std::sqrt(b.clock_offset_var_s2);
      closed["phase_offset"] = std::sqrt(b.phase_offset_var_rad2);
    } else {
      auto b = apcal::crlb_closed_form_unknown_pos_los(ofdm, report.snr_linear);
      closed["tau_ab"] = std::sqrt(b.tau_ab_var_s2);
      closed["clock_offset"] = std::sqrt(b.clock_offset_var_s2);
      closed["phase_offset"] = std::sqrt(b.phase_offset_var_rad2);
    }
    j["closed_form_std"] = closed;
  }

  const std::string crlb_file = out_path(o, "crlb.json");
  std::ofstream f(crlb_file);
  f << j.dump(2) << "\n";
  if (!f) throw apcal::ConfigError("cannot write " + crlb_file);
  write_run_manifest(o, "crlb", cfg, 0, 1, {crlb_file}, warnings);

  std::cout << "SNR: " << apcal::format_double(report.snr_linear)
            << " (linear), condition: " << apcal::format_double(report.condition)
            << "\n";
  for (std::size_t i = 0; i < report.labels.size(); ++i) {
    std::cout << report.labels[i] << ": std >= "
              << apcal::format_double(std::sqrt(report.variance(
                     static_cast<Eigen::Index>(i))))
              << " " << units[i] << "\n";
  }
  std::cout << "wrote " << crlb_file << "\n";
  return 0;
}

int run_sweep(const CommonOpts& o) {
  std::vector<std::string> warnings;
  apcal::AppConfig cfg = load_config(o, &warnings);
  print_warnings(warnings);
  if (o.seed) cfg.sweep.base_seed = *o.seed;
  apcal::validate_scenario(cfg.scenario);

  const int threads = o.threads > 0 ? o.threads : default_threads();
  std::vector<apcal::RmseRecord> records =
      apcal::run_sweep(cfg.scenario, cfg.grid, cfg.sweep, threads);

  const std::string csv_file = out_path(o, "rmse.csv");
  apcal::write_rmse_csv(csv_file, records);
  write_run_manifest(o, "sweep", cfg, cfg.sweep.base_seed, threads, {csv_file},
                     warnings);

  for (const auto& r : records) {
    std::cout << r.param << " @ " << apcal::format_double(r.w_hz / 1e6)
              << " MHz: rmse " << apcal::format_double(r.rmse) << " " << r.unit
              << " (bound " << apcal::format_double(r.crlb_std) << ", "
              << r.trials << " trials";
    if (r.degenerate_count > 0)
      std::cout << ", " << r.degenerate_count << " degenerate";
    std::cout << ")\n";
  }
  std::cout << "wrote " << csv_file << "\n";
  return 0;
}

int run_profile(const CommonOpts& o) {
  std::vector<std::string> warnings;
  apcal::AppConfig cfg = load_config(o, &warnings);
  print_warnings(warnings);
  if (o.seed) cfg.scenario.noise_seed = *o.seed;
  apcal::validate_scenario(cfg.scenario);

  auto samples = apcal::nllf_profile(cfg.scenario, cfg.profile);

  std::string axis_name;
  switch (cfg.profile.axis) {
    case apcal::ProfileSpec::Axis::clock_offset:
      axis_name = "clock_offset_delta_s";
      break;
    case apcal::ProfileSpec::Axis::tau_ab:
      axis_name = "tau_ab_delta_s";
      break;
    case apcal::ProfileSpec::Axis::tau_ar:
      axis_name = "tau_ar_delta_s";
      break;
    case apcal::ProfileSpec::Axis::reflection_phase:
      axis_name = "reflection_phase_delta_rad";
      break;
  }

  const std::string csv_file = out_path(o, "profile.csv");
  apcal::write_profile_csv(csv_file, samples, axis_name);
  write_run_manifest(o, "profile", cfg, cfg.scenario.noise_seed.value_or(0), 1,
                     {csv_file}, warnings);
  std::cout << "wrote " << csv_file << " (" << samples.size() << " points along "
            << axis_name << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "apcal: phase/time calibration of distributed access points over "
      "wideband OFDM links - simulation, maximum-likelihood estimation, "
      "estimation-variance bounds, and benchmark experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOpts sim_o, est_o, crlb_o, sweep_o, prof_o;
  std::string obs_path;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Synthesize a (noisy) frequency-domain observation file");
  add_common(sim, &sim_o);
  CLI::App* est = app.add_subcommand(
      "estimate", "Run the grid-refined ML estimator on an observation file");
  add_common(est, &est_o);
  est->add_option("--obs", obs_path, "Observation JSON produced by 'simulate'")
      ->required();
  CLI::App* crl = app.add_subcommand(
      "crlb", "Evaluate the estimation-variance bound for the scenario");
  add_common(crl, &crlb_o);
  CLI::App* swp = app.add_subcommand(
      "sweep", "Monte-Carlo RMSE versus bandwidth with bound reference");
  add_common(swp, &sweep_o);
  CLI::App* prf = app.add_subcommand(
      "profile", "1-D slice of the concentrated loss through the truth");
  add_common(prf, &prof_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // command-line misuse is a configuration error
  }

  try {
    if (sim->parsed()) return run_simulate(sim_o);
    if (est->parsed()) return run_estimate(est_o, obs_path);
    if (crl->parsed()) return run_crlb(crlb_o);
    if (swp->parsed()) return run_sweep(sweep_o);
    if (prf->parsed()) return run_profile(prof_o);
  } catch (const apcal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const apcal::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const apcal::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
