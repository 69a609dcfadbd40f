#pragma once

#include <string>

#include "cbsmp/scenario.hpp"

namespace cbsmp {

// Environment, obstacles, start/goal markers, and (when given) one colored
// discretized trajectory per agent. Chains are drawn as their tip path plus
// start/goal skeletons.
std::string render_svg(const Scenario& scenario, const SolutionFile* solution);
void render_svg_file(const Scenario& scenario, const SolutionFile* solution,
                     const std::string& path);

}  // namespace cbsmp
