#pragma once

#include <string>

#include "aerograsp/sim.hpp"

namespace aerograsp {

/// Parses a scenario from flat `key = value` text. `#` starts a comment,
/// blank lines are skipped, later keys override earlier ones. Unknown keys,
/// malformed values and out-of-range settings throw ConfigInvalid naming the
/// offending key. See the README for the key reference.
ScenarioConfig parse_scenario(const std::string& text);

/// parse_scenario over the contents of a file. Throws ConfigInvalid when the
/// file cannot be read.
ScenarioConfig load_scenario(const std::string& path);

}  // namespace aerograsp
