#pragma once

// Experiment configuration: strict JSON schema with documented defaults.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "phaselab/protocol.hpp"

namespace phaselab::cli {

struct ExperimentConfig {
  fewshot::ProtocolConfig protocol;
  std::string output_dir = "results";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Throws IoError (missing/unreadable file, missing CSV inputs) or ConfigError
// (bad JSON, unknown key, wrong type, invalid value) naming the offending key.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_json(const nlohmann::json& doc);

// Fully-defaulted echo of a configuration; parse_config_json(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

nlohmann::json to_json(const qsim::CircuitSpec& spec);
qsim::CircuitSpec circuit_from_json(const nlohmann::json& j);

// Human-readable schema with every default, shown by --help.
std::string config_reference();

}  // namespace phaselab::cli
