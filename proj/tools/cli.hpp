#pragma once

// Command-line front end: eg, run, sweep and plan. Kept in a library so
// tests can drive it without spawning processes.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "reductionlab/constants.hpp"
#include "reductionlab/io.hpp"
#include "reductionlab/scenarios.hpp"

namespace reductionlab::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kSchemaError = 2,
  kConvergenceFailure = 3,
  kStableSuperposition = 4,
};

struct RunOptions {
  std::string method = "cascade";  // static | timedep | cascade | mc
  std::uint64_t seed = 1;
  std::size_t trials = 100000;
  unsigned threads = 1;
  std::optional<double> horizon;
};

struct ReportRow {
  std::string outcome;
  double probability = 0.0;
  std::optional<double> standard_error;
  std::optional<double> expected;
  std::string provenance;
};

struct RunReport {
  std::string scenario;
  std::string method;
  std::vector<ReportRow> rows;
  io::Json metadata;  // reproduces the run when fed back to `run`
};

RunReport run_scenario(const scenarios::Scenario& s, const RunOptions& opts,
                       const PhysicalConstants& consts);

/// Header scenario,method,outcome,probability,stderr,expected,provenance.
std::string report_csv(const RunReport& report);

/// Entry point; returns the process exit code.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reductionlab::cli
