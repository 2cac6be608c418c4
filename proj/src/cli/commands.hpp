#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace risktube::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kSplitOverlap = 3, kIo = 4 };

// Parses a simulate config given as JSON or as key = value lines into the JSON
// form. Throws ValidationError naming the offending field.
nlohmann::json parse_simulate_config(const std::string& text);

int run(int argc, char** argv);

}  // namespace risktube::cli
