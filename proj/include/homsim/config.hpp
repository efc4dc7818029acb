#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "homsim/experiment_sim.hpp"
#include "homsim/inference.hpp"
#include "homsim/spatial_mode.hpp"

namespace homsim {

enum class Unit { Time, Length, Temperature, Frequency, Rate, None };

// Parses "26 ns", "1.5 mK", "90 um", "120 kHz", "100 /s" or a plain SI
// number into SI units. Throws config_error on unknown suffixes.
double parse_quantity(const std::string& text, Unit unit);

// JSON values may be numbers (SI) or unit-suffixed strings.
double quantity_from_json(const nlohmann::json& value, Unit unit,
                          const std::string& field);

// Full description of a simulation run. Mirrors the JSON config document;
// every field has a default matching the published experiment.
struct RunConfig {
  PhysicsModel physics;
  SequenceConfig sequence;
  DetectionConfig detection;
  GaussianMode beam;       // collected-fluorescence beam geometry
  std::uint64_t n_loads = 1000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int parallelism = 0;     // 0 = hardware concurrency
  std::string out_dir = "out";
};

RunConfig run_config_from_json(const nlohmann::json& doc);
nlohmann::json run_config_to_json(const RunConfig& config);

// FNV-1a over the canonical (sorted-key) dump of the config document.
std::uint64_t config_hash(const nlohmann::json& doc);

// Hash of the physics-relevant configuration: execution details
// (parallelism, output paths) are dropped so reruns of the same experiment
// carry the same hash.
std::uint64_t run_config_hash(const RunConfig& config);

std::string fit_result_to_json_string(const FitResult&);

} // namespace homsim
