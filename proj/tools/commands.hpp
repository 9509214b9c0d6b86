#pragma once

// Command-line driver. Exit codes: 0 pass, 1 failed mathematical assumption,
// 2 input/output or format error, 3 numerical non-convergence.

#include <iosfwd>
#include <string>
#include <vector>

namespace weylrec::cli {

enum ExitCode : int { kPass = 0, kAssumption = 1, kInput = 2, kNumerical = 3 };

/// Thread count: the flag when positive, else WEYLREC_THREADS, else 0 (runtime default).
int resolve_threads(int flag);

/// Parses "a,b,c" into doubles; throws InputError on junk.
std::vector<double> parse_list(const std::string& text);

/// Full driver; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace weylrec::cli
