#ifndef SUPERPACK_TOOLS_CLI_HPP
#define SUPERPACK_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace superpack::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kVerificationFailed = 2,
    kNumericalFailure = 3,
};

inline constexpr unsigned long long kDefaultSeed = 1;

/// Parses "start:step:end", a comma separated list, or a single value.
/// The end of a range is included when (end - start) / step is an integer
/// to within 1e-12.
std::vector<double> parse_p_grid(const std::string& text);

/// %.12g
std::string fmt12(double v);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace superpack::cli

#endif
