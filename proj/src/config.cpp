#include "apcal/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "apcal/constants.hpp"
#include "apcal/errors.hpp"

namespace apcal {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path.empty() ? what : path + ": " + what);
}

void require_keys(const json& j, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      fail(path + "." + item.key(), "unknown configuration key");
    }
  }
}

double get_number(const json& j, const std::string& path, const char* key,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& path, const char* key,
                         std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    fail(path + "." + key, "expected an integer");
  }
  return v.get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& path, const char* key,
              bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& path, const char* key,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Position2D get_position(const json& j, const std::string& path, const char* key,
                        Position2D fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(path + "." + key, "expected [x_m, y_m]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

// Normalize a phase given in degrees into [0, 360), warning when it moves.
double normalized_phase_deg(double deg, const std::string& where,
                            std::vector<std::string>* warnings) {
  if (deg >= 0.0 && deg < 360.0) return deg;
  double norm = std::fmod(deg, 360.0);
  if (norm < 0.0) norm += 360.0;
  if (warnings) {
    std::ostringstream os;
    os << where << ": " << deg << " deg normalized to " << norm << " deg";
    warnings->push_back(os.str());
  }
  return norm;
}

const std::vector<double> kKnownPosSweepMhz = {6.06,  21.06, 36.06, 51.06,
                                               66.06, 81.06, 96.06, 111.06,
                                               126.06, 141.06};
const std::vector<double> kUnknownPosSweepMhz = {6.06,  24.06,  96.06,
                                                 216.06, 336.06, 384.06};

std::string axis_to_string(ProfileSpec::Axis a) {
  switch (a) {
    case ProfileSpec::Axis::clock_offset: return "clock_offset";
    case ProfileSpec::Axis::tau_ab: return "tau_ab";
    case ProfileSpec::Axis::tau_ar: return "tau_ar";
    case ProfileSpec::Axis::reflection_phase: return "reflection_phase";
  }
  return "clock_offset";
}

}  // namespace

AppConfig parse_config(const json& j, std::vector<std::string>* warnings) {
  AppConfig cfg;
  require_keys(j, "", {"scenario", "grid", "sweep", "profile"});

  // --- scenario ------------------------------------------------------------
  const json sc_j = j.contains("scenario") ? j.at("scenario") : json::object();
  const std::string sp = "scenario";
  require_keys(sc_j, sp,
               {"id", "pos_a_m", "pos_b_m", "pos_reflector_m", "carrier_freq_ghz",
                "subcarrier_spacing_khz", "bandwidth_mhz", "tx_power_mw",
                "noise_psd_dbm_per_hz", "clock_offset_us", "phase_offset_deg",
                "reflection_phase_deg", "observation_channel", "estimator_channel",
                "direction", "reflected_delay_known", "reflection_phase_known",
                "pilots", "pilot_seed", "noise_seed"});
  ScenarioConfig& sc = cfg.scenario;

  const std::string id = get_string(sc_j, sp, "id", "known_positions");
  if (id == "known_positions") {
    sc.id = ScenarioId::known_positions;
  } else if (id == "unknown_positions") {
    sc.id = ScenarioId::unknown_positions;
  } else {
    fail(sp + ".id", "expected \"known_positions\" or \"unknown_positions\"");
  }

  sc.truth.pos_a = get_position(sc_j, sp, "pos_a_m", {50.0, 50.0});
  sc.truth.pos_b = get_position(sc_j, sp, "pos_b_m", {0.0, 0.0});
  sc.truth.pos_reflector = get_position(sc_j, sp, "pos_reflector_m", {0.0, -10.0});

  sc.carrier_freq_hz = 1e9 * get_number(sc_j, sp, "carrier_freq_ghz", 2.0);
  sc.subcarrier_spacing_hz =
      1e3 * get_number(sc_j, sp, "subcarrier_spacing_khz", 60.0);
  sc.bandwidth_hz = 1e6 * get_number(sc_j, sp, "bandwidth_mhz", 96.06);
  sc.tx_power_w = 1e-3 * get_number(sc_j, sp, "tx_power_mw", 10.0);
  const double psd_dbm = get_number(sc_j, sp, "noise_psd_dbm_per_hz", -174.0);
  sc.noise_psd_w_hz = 1e-3 * std::pow(10.0, psd_dbm / 10.0);
  sc.truth.offsets.clock_offset_s = 1e-6 * get_number(sc_j, sp, "clock_offset_us", 0.67);
  sc.truth.offsets.phase_offset_rad = deg_to_rad(normalized_phase_deg(
      get_number(sc_j, sp, "phase_offset_deg", 10.0), sp + ".phase_offset_deg",
      warnings));
  sc.truth.reflection_phase_rad = deg_to_rad(normalized_phase_deg(
      get_number(sc_j, sp, "reflection_phase_deg", 20.0),
      sp + ".reflection_phase_deg", warnings));

  const std::string oc = get_string(sc_j, sp, "observation_channel", "two_path");
  if (oc == "two_path") {
    sc.truth.two_path = true;
  } else if (oc == "los") {
    sc.truth.two_path = false;
  } else {
    fail(sp + ".observation_channel", "expected \"two_path\" or \"los\"");
  }

  // The estimator hypothesis defaults to matching the observed channel in the
  // known-positions scenario; the unknown-positions scenario defaults to the
  // single-path estimator (its 4-D sibling is experimental).
  const std::string ec_default =
      (sc.id == ScenarioId::known_positions) ? oc : "los";
  const std::string ec = get_string(sc_j, sp, "estimator_channel", ec_default);
  if (ec == "two_path") {
    sc.estimator_two_path = true;
  } else if (ec == "los") {
    sc.estimator_two_path = false;
  } else {
    fail(sp + ".estimator_channel", "expected \"two_path\" or \"los\"");
  }

  const std::string dir_default =
      (sc.id == ScenarioId::known_positions) ? "uni_ab" : "bidirectional";
  const std::string dir = get_string(sc_j, sp, "direction", dir_default);
  if (dir == "uni_ab") {
    sc.direction = LinkDirection::uni_ab;
  } else if (dir == "bidirectional") {
    sc.direction = LinkDirection::bidirectional;
  } else {
    fail(sp + ".direction", "expected \"uni_ab\" or \"bidirectional\"");
  }

  sc.map.reflected_delay_known = get_bool(sc_j, sp, "reflected_delay_known", false);
  sc.map.reflection_phase_known = get_bool(sc_j, sp, "reflection_phase_known", false);

  const std::string pilots = get_string(sc_j, sp, "pilots", "constant");
  if (pilots == "constant") {
    sc.pilot_kind = PilotKind::constant;
  } else if (pilots == "qpsk") {
    sc.pilot_kind = PilotKind::qpsk;
  } else {
    fail(sp + ".pilots", "expected \"constant\" or \"qpsk\"");
  }
  sc.pilot_seed = static_cast<std::uint64_t>(get_integer(sc_j, sp, "pilot_seed", 1));
  if (sc_j.contains("noise_seed") && !sc_j.at("noise_seed").is_null()) {
    sc.noise_seed = static_cast<std::uint64_t>(
        get_integer(sc_j, sp, "noise_seed", 0));
  }

  if (sc.carrier_freq_hz <= 0.0) fail(sp + ".carrier_freq_ghz", "must be positive");
  if (sc.subcarrier_spacing_hz <= 0.0) fail(sp + ".subcarrier_spacing_khz", "must be positive");
  if (sc.bandwidth_hz <= 0.0) fail(sp + ".bandwidth_mhz", "must be positive");
  if (sc.tx_power_w <= 0.0) fail(sp + ".tx_power_mw", "must be positive");

  // --- grid ----------------------------------------------------------------
  const json g_j = j.contains("grid") ? j.at("grid") : json::object();
  const std::string gp = "grid";
  require_keys(g_j, gp,
               {"refinement_levels", "shrink_factor", "delay_step_fraction",
                "phase_step_deg", "clock_half_width_m", "tau_ab_half_width_m",
                "tau_ar_half_width_m"});
  GridSpec& grid = cfg.grid;
  grid.refinement_levels =
      static_cast<int>(get_integer(g_j, gp, "refinement_levels", grid.refinement_levels));
  grid.shrink_factor = get_number(g_j, gp, "shrink_factor", grid.shrink_factor);
  grid.delay_step_fraction =
      get_number(g_j, gp, "delay_step_fraction", grid.delay_step_fraction);
  grid.phase_step_rad =
      deg_to_rad(get_number(g_j, gp, "phase_step_deg", rad_to_deg(grid.phase_step_rad)));
  grid.clock_half_width_s =
      get_number(g_j, gp, "clock_half_width_m",
                 grid.clock_half_width_s * kSpeedOfLight) / kSpeedOfLight;
  grid.tau_ab_half_width_s =
      get_number(g_j, gp, "tau_ab_half_width_m",
                 grid.tau_ab_half_width_s * kSpeedOfLight) / kSpeedOfLight;
  grid.tau_ar_half_width_s =
      get_number(g_j, gp, "tau_ar_half_width_m",
                 grid.tau_ar_half_width_s * kSpeedOfLight) / kSpeedOfLight;
  if (grid.refinement_levels < 0 || grid.refinement_levels > 12) {
    fail(gp + ".refinement_levels", "must lie in [0, 12]");
  }
  if (!(grid.shrink_factor > 0.0) || !(grid.shrink_factor < 1.0)) {
    fail(gp + ".shrink_factor", "must lie in (0, 1)");
  }
  if (!(grid.delay_step_fraction > 0.0) || grid.delay_step_fraction > 1.0) {
    fail(gp + ".delay_step_fraction", "must lie in (0, 1]");
  }
  if (!(grid.phase_step_rad > 0.0) || grid.phase_step_rad > kPi / 2) {
    fail(gp + ".phase_step_deg", "must lie in (0, 90]");
  }
  if (!(grid.clock_half_width_s > 0.0) || !(grid.tau_ab_half_width_s > 0.0) ||
      !(grid.tau_ar_half_width_s > 0.0)) {
    fail(gp, "grid half-widths must be positive");
  }

  // --- sweep ---------------------------------------------------------------
  const json s_j = j.contains("sweep") ? j.at("sweep") : json::object();
  const std::string swp = "sweep";
  require_keys(s_j, swp, {"bandwidths_mhz", "trials", "base_seed", "center_jitter_m"});
  SweepSpec& sweep = cfg.sweep;
  if (s_j.contains("bandwidths_mhz")) {
    const json& arr = s_j.at("bandwidths_mhz");
    if (!arr.is_array() || arr.empty()) {
      fail(swp + ".bandwidths_mhz", "expected a non-empty array of numbers");
    }
    sweep.bandwidths_hz.clear();
    for (const auto& v : arr) {
      if (!v.is_number()) fail(swp + ".bandwidths_mhz", "expected numbers");
      sweep.bandwidths_hz.push_back(1e6 * v.get<double>());
    }
  } else {
    const auto& mhz = (sc.id == ScenarioId::known_positions) ? kKnownPosSweepMhz
                                                             : kUnknownPosSweepMhz;
    sweep.bandwidths_hz.clear();
    for (double m : mhz) sweep.bandwidths_hz.push_back(1e6 * m);
  }
  sweep.trials = static_cast<int>(get_integer(s_j, swp, "trials", sweep.trials));
  sweep.base_seed =
      static_cast<std::uint64_t>(get_integer(s_j, swp, "base_seed",
                                             static_cast<std::int64_t>(sweep.base_seed)));
  sweep.center_jitter_m = get_number(s_j, swp, "center_jitter_m", sweep.center_jitter_m);
  if (sweep.trials < 1) fail(swp + ".trials", "must be at least 1");
  if (sweep.center_jitter_m < 0.0) fail(swp + ".center_jitter_m", "must be non-negative");
  for (double w : sweep.bandwidths_hz) {
    if (w <= 0.0) fail(swp + ".bandwidths_mhz", "bandwidths must be positive");
  }

  // --- profile -------------------------------------------------------------
  const json p_j = j.contains("profile") ? j.at("profile") : json::object();
  const std::string pp = "profile";
  require_keys(p_j, pp, {"axis", "half_width_m", "half_width_deg", "points"});
  ProfileSpec& prof = cfg.profile;
  const std::string axis = get_string(p_j, pp, "axis", "clock_offset");
  if (axis == "clock_offset") {
    prof.axis = ProfileSpec::Axis::clock_offset;
  } else if (axis == "tau_ab") {
    prof.axis = ProfileSpec::Axis::tau_ab;
  } else if (axis == "tau_ar") {
    prof.axis = ProfileSpec::Axis::tau_ar;
  } else if (axis == "reflection_phase") {
    prof.axis = ProfileSpec::Axis::reflection_phase;
  } else {
    fail(pp + ".axis",
         "expected \"clock_offset\", \"tau_ab\", \"tau_ar\" or \"reflection_phase\"");
  }
  prof.half_width_s = get_number(p_j, pp, "half_width_m",
                                 prof.half_width_s * kSpeedOfLight) / kSpeedOfLight;
  prof.half_width_rad =
      deg_to_rad(get_number(p_j, pp, "half_width_deg", rad_to_deg(prof.half_width_rad)));
  prof.points = static_cast<int>(get_integer(p_j, pp, "points", prof.points));
  if (!(prof.half_width_s > 0.0)) fail(pp + ".half_width_m", "must be positive");
  if (!(prof.half_width_rad > 0.0)) fail(pp + ".half_width_deg", "must be positive");
  if (prof.points < 2) fail(pp + ".points", "must be at least 2");

  // Cross-field consistency (scenario/direction pairing, usable geometry) is
  // part of accepting a configuration.
  validate_scenario(cfg.scenario);
  return cfg;
}

AppConfig parse_config_file(const std::string& path,
                            std::vector<std::string>* warnings) {
  json j;
  try {
    if (path == "-") {
      j = json::parse(std::cin);
    } else {
      std::ifstream f(path);
      if (!f) throw ConfigError("cannot open config file: " + path);
      j = json::parse(f);
    }
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, warnings);
}

json serialize_config(const AppConfig& cfg) {
  const ScenarioConfig& sc = cfg.scenario;
  json sc_j;
  sc_j["id"] = (sc.id == ScenarioId::known_positions) ? "known_positions"
                                                      : "unknown_positions";
  sc_j["pos_a_m"] = {sc.truth.pos_a.x_m, sc.truth.pos_a.y_m};
  sc_j["pos_b_m"] = {sc.truth.pos_b.x_m, sc.truth.pos_b.y_m};
  sc_j["pos_reflector_m"] = {sc.truth.pos_reflector.x_m, sc.truth.pos_reflector.y_m};
  sc_j["carrier_freq_ghz"] = sc.carrier_freq_hz / 1e9;
  sc_j["subcarrier_spacing_khz"] = sc.subcarrier_spacing_hz / 1e3;
  sc_j["bandwidth_mhz"] = sc.bandwidth_hz / 1e6;
  sc_j["tx_power_mw"] = sc.tx_power_w / 1e-3;
  sc_j["noise_psd_dbm_per_hz"] = 10.0 * std::log10(sc.noise_psd_w_hz / 1e-3);
  sc_j["clock_offset_us"] = sc.truth.offsets.clock_offset_s / 1e-6;
  sc_j["phase_offset_deg"] = rad_to_deg(sc.truth.offsets.phase_offset_rad);
  sc_j["reflection_phase_deg"] = rad_to_deg(sc.truth.reflection_phase_rad);
  sc_j["observation_channel"] = sc.truth.two_path ? "two_path" : "los";
  sc_j["estimator_channel"] = sc.estimator_two_path ? "two_path" : "los";
  sc_j["direction"] =
      (sc.direction == LinkDirection::uni_ab) ? "uni_ab" : "bidirectional";
  sc_j["reflected_delay_known"] = sc.map.reflected_delay_known;
  sc_j["reflection_phase_known"] = sc.map.reflection_phase_known;
  sc_j["pilots"] = (sc.pilot_kind == PilotKind::constant) ? "constant" : "qpsk";
  sc_j["pilot_seed"] = sc.pilot_seed;
  if (sc.noise_seed.has_value()) {
    sc_j["noise_seed"] = *sc.noise_seed;
  } else {
    sc_j["noise_seed"] = nullptr;
  }

  json g_j;
  g_j["refinement_levels"] = cfg.grid.refinement_levels;
  g_j["shrink_factor"] = cfg.grid.shrink_factor;
  g_j["delay_step_fraction"] = cfg.grid.delay_step_fraction;
  g_j["phase_step_deg"] = rad_to_deg(cfg.grid.phase_step_rad);
  g_j["clock_half_width_m"] = cfg.grid.clock_half_width_s * kSpeedOfLight;
  g_j["tau_ab_half_width_m"] = cfg.grid.tau_ab_half_width_s * kSpeedOfLight;
  g_j["tau_ar_half_width_m"] = cfg.grid.tau_ar_half_width_s * kSpeedOfLight;

  json s_j;
  json bws = json::array();
  for (double w : cfg.sweep.bandwidths_hz) bws.push_back(w / 1e6);
  s_j["bandwidths_mhz"] = bws;
  s_j["trials"] = cfg.sweep.trials;
  s_j["base_seed"] = cfg.sweep.base_seed;
  s_j["center_jitter_m"] = cfg.sweep.center_jitter_m;

  json p_j;
  p_j["axis"] = axis_to_string(cfg.profile.axis);
  p_j["half_width_m"] = cfg.profile.half_width_s * kSpeedOfLight;
  p_j["half_width_deg"] = rad_to_deg(cfg.profile.half_width_rad);
  p_j["points"] = cfg.profile.points;

  return json{{"scenario", sc_j}, {"grid", g_j}, {"sweep", s_j}, {"profile", p_j}};
}

// ---------------------------------------------------------------------------
// Observation files
// ---------------------------------------------------------------------------

namespace {

json complex_array(const std::vector<std::complex<double>>& v) {
  json arr = json::array();
  for (const auto& z : v) arr.push_back({z.real(), z.imag()});
  return arr;
}

std::vector<std::complex<double>> complex_vector(const json& arr,
                                                 const std::string& path) {
  if (!arr.is_array()) fail(path, "expected an array of [re, im] pairs");
  std::vector<std::complex<double>> v;
  v.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      fail(path, "expected [re, im] pairs");
    }
    v.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return v;
}

constexpr const char* kObservationFormat = "apcal-observation/1";

}  // namespace

json observation_to_json(const ObservationSet& obs) {
  json j;
  j["format"] = kObservationFormat;
  j["carrier_freq_hz"] = obs.cfg.carrier_freq_hz;
  j["subcarrier_spacing_hz"] = obs.cfg.subcarrier_spacing_hz;
  j["num_subcarriers"] = obs.cfg.num_subcarriers;
  j["tx_power_w"] = obs.cfg.tx_power_w;
  j["noise_psd_w_hz"] = obs.cfg.noise_psd_w_hz;
  j["direction"] =
      (obs.direction == LinkDirection::uni_ab) ? "uni_ab" : "bidirectional";
  j["pilots_a"] = complex_array(obs.pilots_a.symbols);
  j["pilots_b"] = complex_array(obs.pilots_b.symbols);
  j["y_ab"] = complex_array(obs.y_ab);
  j["y_ba"] = complex_array(obs.y_ba);
  return j;
}

ObservationSet observation_from_json(const json& j) {
  require_keys(j, "observation",
               {"format", "carrier_freq_hz", "subcarrier_spacing_hz",
                "num_subcarriers", "tx_power_w", "noise_psd_w_hz", "direction",
                "pilots_a", "pilots_b", "y_ab", "y_ba"});
  if (get_string(j, "observation", "format", "") != kObservationFormat) {
    fail("observation.format", "unsupported observation file format");
  }
  ObservationSet obs;
  obs.cfg.carrier_freq_hz = get_number(j, "observation", "carrier_freq_hz", 0.0);
  obs.cfg.subcarrier_spacing_hz =
      get_number(j, "observation", "subcarrier_spacing_hz", 0.0);
  obs.cfg.num_subcarriers =
      static_cast<int>(get_integer(j, "observation", "num_subcarriers", 0));
  obs.cfg.tx_power_w = get_number(j, "observation", "tx_power_w", 0.0);
  obs.cfg.noise_psd_w_hz = get_number(j, "observation", "noise_psd_w_hz", 0.0);
  const std::string dir = get_string(j, "observation", "direction", "");
  if (dir == "uni_ab") {
    obs.direction = LinkDirection::uni_ab;
  } else if (dir == "bidirectional") {
    obs.direction = LinkDirection::bidirectional;
  } else {
    fail("observation.direction", "expected \"uni_ab\" or \"bidirectional\"");
  }
  obs.pilots_a.symbols = complex_vector(j.at("pilots_a"), "observation.pilots_a");
  obs.pilots_b.symbols = complex_vector(j.at("pilots_b"), "observation.pilots_b");
  obs.y_ab = complex_vector(j.at("y_ab"), "observation.y_ab");
  obs.y_ba = complex_vector(j.at("y_ba"), "observation.y_ba");
  if (obs.cfg.num_subcarriers < 3 || obs.cfg.num_subcarriers % 2 == 0) {
    fail("observation.num_subcarriers", "expected an odd count >= 3");
  }
  return obs;
}

void write_observation_file(const std::string& path, const ObservationSet& obs) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << observation_to_json(obs).dump(2) << '\n';
  if (!f.good()) throw ConfigError("failed while writing: " + path);
}

ObservationSet read_observation_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open observation file: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("observation file is not valid JSON: ") + e.what());
  }
  return observation_from_json(j);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

json estimate_to_json(const EstimateResult& result) {
  const char* kind = "";
  switch (result.kind) {
    case EstimatorKind::uni_los: kind = "uni_los"; break;
    case EstimatorKind::uni_two_path: kind = "uni_two_path"; break;
    case EstimatorKind::bi_los: kind = "bi_los"; break;
    case EstimatorKind::bi_two_path: kind = "bi_two_path"; break;
  }
  json p;
  p["tau_ab_s"] = result.params.tau_ab_s;
  p["clock_offset_s"] = result.params.clock_offset_s;
  p["phase_offset_rad"] = result.params.phase_offset_rad;
  p["tau_ar_s"] = result.params.tau_ar_s;
  p["reflection_phase_rad"] = result.params.reflection_phase_rad;
  p["gain_ab"] = result.params.gain_ab;
  p["gain_ar"] = result.params.gain_ar;
  json j;
  j["format"] = "apcal-estimate/1";
  j["estimator"] = kind;
  j["params"] = p;
  j["nllf_at_min"] = result.nllf_at_min;
  j["phase_ambiguity_period_rad"] = result.phase_ambiguity_period_rad;
  j["gram_regularized"] = result.gram_regularized;
  j["negative_gain"] = result.negative_gain;
  j["coarse_only"] = result.coarse_only;
  j["nllf_evaluations"] = result.nllf_evaluations;
  j["level_minima"] = result.level_minima;
  return j;
}

json crlb_to_json(const CrlbReport& report, const std::vector<std::string>& units) {
  const char* variant = "";
  switch (report.variant) {
    case FimVariant::known_pos_los: variant = "known_pos_los"; break;
    case FimVariant::known_pos_two_path: variant = "known_pos_two_path"; break;
    case FimVariant::unknown_pos_los: variant = "unknown_pos_los"; break;
    case FimVariant::unknown_pos_two_path: variant = "unknown_pos_two_path"; break;
  }
  json j;
  j["format"] = "apcal-crlb/1";
  j["variant"] = variant;
  j["labels"] = report.labels;
  j["units"] = units;
  j["snr_linear"] = report.snr_linear;
  j["condition"] = report.condition;
  json fim_rows = json::array();
  for (Eigen::Index r = 0; r < report.information.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < report.information.cols(); ++c) {
      row.push_back(report.information(r, c));
    }
    fim_rows.push_back(row);
  }
  j["fim"] = fim_rows;
  json stds;
  for (std::size_t i = 0; i < report.labels.size(); ++i) {
    stds[report.labels[i]] = std::sqrt(report.variance(static_cast<int>(i)));
  }
  j["crlb_std"] = stds;
  return j;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  json j;
  j["format"] = "apcal-manifest/1";
  j["tool"] = "apcal";
  j["tool_version"] = manifest.tool_version;
  j["command"] = manifest.command;
  j["base_seed"] = manifest.base_seed;
  j["threads"] = manifest.threads;
  j["outputs"] = manifest.outputs;
  j["warnings"] = manifest.warnings;
  j["resolved_config"] = serialize_config(manifest.resolved_config);
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << j.dump(2) << '\n';
  if (!f.good()) throw ConfigError("failed while writing: " + path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace apcal
