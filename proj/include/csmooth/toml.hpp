#pragma once

#include <string>

#include <json.hpp>

namespace csmooth {

// Minimal TOML reader covering the subset the config files use: [table] and
// [dotted.table] headers, `key = value` pairs with strings, integers,
// floats, booleans and flat arrays, and # comments. Returns the equivalent
// JSON object tree. Throws ConfigError with a line number on anything it
// does not understand.
nlohmann::json parse_toml(const std::string& text);

// Dispatch on content: first non-space character `{` means JSON, anything
// else is parsed as TOML.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config_file(const std::string& path);

// Applies one `dotted.path=value` override onto a JSON tree. The value is
// parsed as JSON when possible and falls back to a plain string.
void apply_override(nlohmann::json& config, const std::string& assignment);

}  // namespace csmooth
