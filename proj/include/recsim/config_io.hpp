#pragma once

#include "recsim/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace recsim {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Round-trippable decimal rendering (%.17g, trailing noise kept).
std::string format_real(double v);

std::vector<double> parse_real_list(const std::string& text, const std::string& field);
double parse_real(const std::string& text, const std::string& field);
long long parse_integer(const std::string& text, const std::string& field);
/// Accepts true/false/1/0.
bool parse_bool(const std::string& text, const std::string& field);

/// Every SimulationConfig field as a dotted key and its text value, in canonical order.
ConfigEntries config_entries(const SimulationConfig& cfg);

/// Sets one dotted key (e.g. `population.q`). Throws ConfigError on unknown keys or bad values.
void apply_setting(SimulationConfig& cfg, const std::string& key, const std::string& value);

/// Reads an INI document: `[simulation]` keys map to top-level fields, any other
/// section `[s]` maps to `s.key`. Returns all entries in file order so callers
/// can route sections they own (e.g. `[grid]`).
ConfigEntries read_ini_file(const std::string& path);
ConfigEntries read_ini_text(const std::string& text);

/// Renders entries as INI, grouping dotted keys by section prefix.
std::string write_ini(const ConfigEntries& entries);

}  // namespace recsim
