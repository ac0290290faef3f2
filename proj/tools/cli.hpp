#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitSolverFailure = 1,  ///< divergence or non-finite values, replay mismatch
  kExitUsage = 2,          ///< I/O errors and invalid arguments
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs one command. `args` excludes the program name, e.g.
/// {"synth", "--dims", "30,30,30", "--rank", "3,3"}.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

/// Independent seed for stream (a, b) of a root seed, via splitmix64.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b);

}  // namespace ttc::cli
