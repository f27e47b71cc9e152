#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "entropic/sim.hpp"

namespace entropic {

/// Parses a JSON scenario document. Missing keys take their defaults. Throws
/// Error(kConfig) naming any unknown key, wrong type or out-of-range value.
ScenarioConfig parse_config(std::string_view text);

/// Canonical form: every key present, keys sorted, two-space indentation.
std::string serialize_config(const ScenarioConfig& config);

/// Hex SHA-256 of the compact canonical form. Independent of key order and
/// whitespace in the source text.
std::string config_hash(const ScenarioConfig& config);

/// Applies `dotted.key=value` style overrides to JSON text and returns the
/// merged text. `value` is read as JSON when it parses, else as a string.
/// Throws Error(kConfig) for a key outside the schema.
std::string apply_overrides(std::string_view text,
                            const std::vector<std::pair<std::string, std::string>>& overrides);

/// Reads a file into a string. Throws Error(kIo) with the path on failure.
std::string read_text_file(const std::string& path);

struct RunManifest {
  std::string config_hash;
  std::string artifact_version;
  std::uint64_t seed = 0;
  std::vector<std::string> output_paths;

  std::string to_json() const;
};

/// Semantic version of this build.
std::string_view artifact_version();

}  // namespace entropic
