#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace parley::cli {

/// Rewrites the historical single-dash `-dt` flag to `--datatype` so the
/// parser sees a regular long option.
std::vector<std::string> normalize_args(std::vector<std::string> args);

/// Runs one command line; `args` excludes the program name. Returns the
/// process exit code: 0 success, 2 usage error, 3 task or data error,
/// 4 remote error, 1 anything else.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace parley::cli
