#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tsim/engine.hpp"

namespace tsim {

/// Named starting points: directory, tardis-base (MSI, static lease),
/// tardis-live (adds the livelock detector), tardis-opt (MESI, detector
/// and lease predictor).
const std::vector<std::string>& preset_names();
EngineConfig preset(std::string_view name);

/// Sets one key. Throws ConfigError for unknown keys or unparsable values.
void apply_setting(EngineConfig& cfg, std::string_view key, std::string_view value);

/// Flat text: one `key = value` per line, `#` starts a comment. A
/// `preset = name` line resets every key to that preset first.
EngineConfig parse_config(std::string_view text, EngineConfig base = {});
EngineConfig load_config_file(const std::string& path);

/// Inverse of parse_config; lists every key.
std::string format_config(const EngineConfig& cfg);

}  // namespace tsim
