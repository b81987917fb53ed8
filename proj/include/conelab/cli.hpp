#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace conelab::cli {

// Exit statuses.
inline constexpr int kPass = 0;
inline constexpr int kFail = 1;
inline constexpr int kSchema = 2;

// Runs one subcommand (args exclude the program name). Reports land under the
// output directory: summary.json, reports/*.csv, profiles/*.csv.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conelab::cli
