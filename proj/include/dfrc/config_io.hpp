#pragma once

#include <cstdint>
#include <string>

#include "dfrc/core.hpp"

namespace dfrc {

/// Parse a JSON object of SystemConfig fields. Missing keys keep their
/// defaults; unknown keys throw InvalidArgument. Angles are in degrees
/// (keys ending in _deg). The result is validated.
SystemConfig parse_config(const std::string& json_text);
SystemConfig load_config(const std::string& path);

/// Canonical JSON rendering (sorted keys, degrees for angles).
std::string config_to_json(const SystemConfig& cfg);

/// FNV-1a 64 over the canonical rendering, as 16 hex digits.
std::string config_hash(const SystemConfig& cfg);

/// Set one numeric field by its config-file key (used by sweeps).
void set_config_field(SystemConfig& cfg, const std::string& key, double value);

}  // namespace dfrc
