#ifndef PNAR_TOOLS_CLI_HPP
#define PNAR_TOOLS_CLI_HPP

#include <ostream>

namespace pnar::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;    // I/O and numerical failures
inline constexpr int kParseError = 2;      // bad flags, values or input files
inline constexpr int kUnstable = 3;        // unstable spec under --strict
inline constexpr int kDimensionError = 4;  // data and network disagree on N

inline constexpr const char* kVersion = "0.1.0";

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pnar::cli

#endif  // PNAR_TOOLS_CLI_HPP
