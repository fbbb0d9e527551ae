#pragma once

#include <string>

#include <json.hpp>

#include "weylspec/potential.hpp"

namespace weylspec {

/// Builds a potential from its JSON description (schema in docs/config.md).
/// Throws ConfigError naming the offending key for malformed input, and for any
/// PreconditionError raised by the constructors (reported under the key "potential").
PotentialSpec build_potential(const nlohmann::json& config);

/// Reads a JSON file and calls build_potential on it, or on its "potential" member when present.
PotentialSpec load_potential(const std::string& path);

/// Parses a complex matrix written as nested rows of numbers or [re, im] pairs.
CMatrix parse_complex_matrix(const nlohmann::json& value, const std::string& key);

/// Parses a number or a numeric expression string such as "pi" or "2*pi".
double parse_real(const nlohmann::json& value, const std::string& key);

}  // namespace weylspec
