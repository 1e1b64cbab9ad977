#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>

#include "json.hpp"

#include "ctepa/core.hpp"
#include "ctepa/phaseplane.hpp"

namespace ctepa::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

// Keys k, c_minus, c_plus, nu_minus, nu_plus, all required; validated.
Params params_from_json(const Json& j);
Json to_json(const Params& p);
Json to_json(const Regime& r);
// Corner values under their serialized names (w1, s2, ..., wt_star), null when not reached.
Json to_json(const CornerSet& cs);
Json to_json(const Admissibility& a);

// Parses a file; ConfigError on I/O or syntax errors.
Json read_json_file(const std::string& path);

// ConfigError unless j is an object whose keys all appear in `allowed`.
void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);
// Typed access; ConfigError when missing or of the wrong type.
double get_number(const Json& j, const char* key, const std::string& where);
double get_number(const Json& j, const char* key, const std::string& where, double fallback);

// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const Json& config);
// First line of every CSV output.
std::string csv_header(const std::string& hash);
// {"tool": "ctepa", "version": ..., "config_hash": ...}
Json meta(const std::string& hash);

}  // namespace ctepa::io
