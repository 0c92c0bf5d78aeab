#pragma once

#include <string>
#include <vector>

#include "yamabe/config.hpp"

namespace yamabe {

/// Exit codes of run_scenario.
inline constexpr int kExitPass = 0;
inline constexpr int kExitExecutionError = 1;
inline constexpr int kExitAssertionFailed = 2;

struct RunOptions {
  int threads = 1;
  bool quiet = false;  // suppress progress lines on stderr
};

/// Worker count from YAMABE_LAB_THREADS (default 2, at least 1).
int threads_from_env();

/// Runs the scenario's pipeline and writes its CSV/JSON files and
/// manifest.json into scenario.out_dir. Returns 0 when every check passed,
/// 2 when a check failed (the report is still written), 1 on an execution
/// error. A NumericalError from the numeric core counts as a failed check.
int run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

}  // namespace yamabe
