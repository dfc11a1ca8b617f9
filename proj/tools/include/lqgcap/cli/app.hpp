#ifndef LQGCAP_CLI_APP_HPP
#define LQGCAP_CLI_APP_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "lqgcap/capacity_ub.hpp"

namespace lqgcap::cli {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitInfeasible = 2 };

struct CliOptions {
  std::string command;
  std::string config;
  std::string output;  // empty: stdout
  std::optional<RateUnits> units;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  int jobs = 0;  // 0: hardware concurrency
  bool lax = false;
};

/// Runs one command and returns its exit status. Errors are logged, not thrown.
int run(const CliOptions& opts);

/// Parses argv (CLI11) and dispatches to run().
int main_entry(int argc, char** argv);

/// Applies LQGCAP_LOG (trace, debug, info, warn, error, off) to the default logger.
void configure_logging();

}  // namespace lqgcap::cli

#endif  // LQGCAP_CLI_APP_HPP
