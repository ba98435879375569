#pragma once

#include <span>
#include <string>
#include <vector>

namespace apf {

/// Reads an observation record from CSV with header `k,y`, one observation
/// per line. Throws ConfigError on malformed input.
std::vector<double> read_observation_csv(const std::string& path);

/// Writes a record in the same format; values use %.17g so the doubles
/// round-trip exactly.
void write_observation_csv(const std::string& path, std::span<const double> record);

}  // namespace apf
