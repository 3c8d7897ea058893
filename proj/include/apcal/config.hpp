// Configuration parsing/serialization (strict-keyed JSON with explicit units
// in field names), observation-file I/O, and the run manifest.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "apcal/experiments.hpp"

namespace apcal {

/// Fully resolved tool configuration.
struct AppConfig {
  ScenarioConfig scenario;
  GridSpec grid;
  SweepSpec sweep;
  ProfileSpec profile;
};

/// Parse a configuration object. Every field is optional and defaults to the
/// benchmark desk-scale deployment; unknown keys anywhere are rejected with
/// their full path; values are validated after unit conversion. Phases given
/// outside [0, 360) degrees are normalized into range with a warning appended
/// to `warnings` (if provided). Throws ConfigError.
AppConfig parse_config(const nlohmann::json& j,
                       std::vector<std::string>* warnings = nullptr);

/// Read + parse a JSON config file ("-" reads stdin).
AppConfig parse_config_file(const std::string& path,
                            std::vector<std::string>* warnings = nullptr);

/// Serialize back to the canonical field set (same keys and units that
/// parse_config accepts, all fields explicit). parse(serialize(x)) == x.
nlohmann::json serialize_config(const AppConfig& cfg);

/// Observation-set round trip.
nlohmann::json observation_to_json(const ObservationSet& obs);
ObservationSet observation_from_json(const nlohmann::json& j);
void write_observation_file(const std::string& path, const ObservationSet& obs);
ObservationSet read_observation_file(const std::string& path);

/// Estimate / bound reports as JSON.
nlohmann::json estimate_to_json(const EstimateResult& result);
nlohmann::json crlb_to_json(const CrlbReport& report,
                            const std::vector<std::string>& units);

/// Provenance record written next to every output.
struct RunManifest {
  std::string command;
  std::string tool_version;
  AppConfig resolved_config;
  std::uint64_t base_seed = 0;
  int threads = 1;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
};
void write_manifest(const std::string& path, const RunManifest& manifest);

/// Shortest-roundtrip-style decimal formatting used in CSV output
/// (locale-independent, 17 significant digits).
std::string format_double(double v);

}  // namespace apcal
