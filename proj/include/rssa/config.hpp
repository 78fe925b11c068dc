#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rssa/mpc.hpp"
#include "rssa/sim.hpp"

namespace rssa {

/// Everything one experiment needs, parsed from a structured-text config.
struct ExperimentConfig {
  std::string name;
  PlantProblem problem;
  PrecomputeOptions options;
  double beta = 0.0;
  std::vector<int> disturbance_active;
  Reference reference;
  /// Fixed initial state of single simulations.
  Eigen::VectorXd x0;
  MonteCarloProtocol protocol;
  RoaGrid roa;
  std::string output_dir;
  /// Config with every default filled in; this is what gets hashed and
  /// recorded in artifacts.
  nlohmann::json normalized;
};

/// Fills defaults and validates the schema. Errors are kConfig and name the
/// offending field path ("weights.Q_u: ...").
nlohmann::json normalize_config(const nlohmann::json& raw);

/// normalize_config followed by conversion to typed form.
ExperimentConfig parse_config(const nlohmann::json& raw);

/// Reads and parses a config file. kIo when unreadable, kConfig when malformed.
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64 of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& normalized);

/// Quadrotor position model sampled at 0.2 s with the published constraint
/// bounds, weights and reference.
nlohmann::json drone_preset_json(double beta = 0.02,
                                 ControllerKind kind = ControllerKind::kRssa);

/// RFC 7386 merge patch; CLI overrides are applied this way before parsing.
nlohmann::json apply_overrides(nlohmann::json config, const nlohmann::json& patch);

}  // namespace rssa
