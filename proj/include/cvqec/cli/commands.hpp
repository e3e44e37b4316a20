#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvqec/cli/config.hpp"

namespace cvqec::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitSuiteFailure = 1,
  kExitParameterError = 2,
  kExitResourceError = 3,
  kExitInternalError = 4,
};

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env());

// Fixed 12-significant-digit rendering used in every CSV cell.
std::string format_number(double x);

// "# key=value" lines echoing the resolved configuration (output path excluded).
std::string provenance_header(const RunConfig& config);

std::string cmd_fig2(const RunConfig& config);
std::string cmd_fig3(const RunConfig& config);
std::string cmd_epr_params(const RunConfig& config);
std::string cmd_bounds(const RunConfig& config);

struct VerifyOutcome {
  nlohmann::json report;
  bool pass;
  std::vector<std::string> failing;
};

VerifyOutcome cmd_verify(const RunConfig& config);

// Structural validation of a verify report; returns the list of problems.
std::vector<std::string> check_verify_schema(const nlohmann::json& report);

}  // namespace cvqec::cli
