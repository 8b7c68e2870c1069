#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "iekf/sim.hpp"

namespace iekf {

/// Parses the flat "key = value" format described in the README. Lines
/// starting with '#' are comments. Unknown or repeated keys, malformed values
/// and inconsistent scenarios all raise ConfigError, with the offending line
/// number where there is one.
Scenario parse_config(std::istream& in);
Scenario parse_config_string(const std::string& text);
Scenario load_config(const std::string& path);

/// "x y [z]; x y [z]; ..." as used by the landmarks key.
std::vector<Eigen::VectorXd> parse_landmarks(const std::string& value, int line = 0);

/// Inverse of parse_config, up to float formatting.
std::string format_config(const Scenario& sc);

}  // namespace iekf
