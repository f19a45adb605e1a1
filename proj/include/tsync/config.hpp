#pragma once

// Flat INI-style experiment configuration.
//
//   [gains]
//   k_r = 0.1
//   gamma2 = 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5
//
// Every SimConfig field has a "section.key" name. Overrides use the same
// names; a bare key is accepted when it is unique across sections. Vectors
// are comma-separated. Matrices accept one entry (scaled identity), n
// entries (diagonal) or n*n entries (row-major).

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tsync/simulator.hpp"

namespace tsync {

using KeyValues = std::map<std::string, std::string>;

/// All recognised "section.key" names.
const std::vector<std::string>& config_keys();

/// Resolves a possibly unqualified key; throws ConfigError for unknown or
/// ambiguous names.
std::string resolve_key(const std::string& key);

KeyValues read_key_values(std::istream& in, const std::string& source_name);
KeyValues read_key_values_file(const std::filesystem::path& path);

/// Applies "key=value" strings on top of kv.
void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides);

/// Fills a SimConfig from defaults plus kv and validates it.
SimConfig config_from_key_values(const KeyValues& kv);

/// Empty path means "defaults only".
SimConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
SimConfig parse_config_string(const std::string& text, const std::vector<std::string>& overrides = {});

/// Round-trip exact serialization of every field.
std::string write_config(const SimConfig& cfg);

}  // namespace tsync
