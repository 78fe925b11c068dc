#pragma once

#include <string>

#include <json.hpp>

#include "rssa/mpc.hpp"

namespace rssa {

inline constexpr const char* kArtifactFormat = "rssa-artifact";
inline constexpr int kArtifactVersion = 1;

/// An artifact plus the normalized config it was built from.
struct StoredArtifact {
  ControllerArtifacts art;
  nlohmann::json config;
  std::string config_hash;
};

/// Every offline product except the condensed QP templates and the support
/// representation of F, which are rebuilt deterministically on load. Doubles
/// are written with round-trip precision.
nlohmann::json artifact_to_json(const StoredArtifact& stored);

/// Throws kIo on a wrong format tag or version, kConfig on missing fields.
StoredArtifact artifact_from_json(const nlohmann::json& j);

void save_artifact(const StoredArtifact& stored, const std::string& path);
StoredArtifact load_artifact(const std::string& path);

}  // namespace rssa
