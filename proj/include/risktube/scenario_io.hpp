#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "risktube/scenario.hpp"

namespace risktube {

inline constexpr const char* kScenarioSchema = "risktube/scenario/v1";

nlohmann::json scenario_to_json(const Scenario& s);
// Validates frame order, score range and distances. Throws ValidationError.
Scenario scenario_from_json(const nlohmann::json& j);

// One scenario per line.
void write_scenarios(std::ostream& os, const std::vector<Scenario>& scenarios);
std::vector<Scenario> read_scenarios(std::istream& is);
// Throws IoError when the file cannot be opened.
std::vector<Scenario> read_scenarios(const std::filesystem::path& path);

}  // namespace risktube
