#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace absorbd::cli {

enum ExitCode : int { ok = 0, usage = 1, invalid = 2, invariant = 3 };

/// Runs one command. args excludes the program name. The report goes to out,
/// errors to err as a one-line JSON object {"error": code, "message": ...}.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace absorbd::cli
