#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qmorse::cli {

/// Exit statuses.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

/// Entry point shared by the executable and the tests. Results go to `out`,
/// machine-readable errors ({"error": code, "message": ...}) to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Whether an error code denotes bad input (exit 2) rather than a runtime failure (exit 1).
bool is_input_error(const std::string& code);

}  // namespace qmorse::cli
