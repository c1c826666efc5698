#pragma once

#include "quditls/config.hpp"
#include "quditls/report.hpp"

#include <string>

namespace quditls {
namespace runner {

/// Exit codes of the CLI contract.
enum ExitCode {
    kOk = 0,
    kConfigError = 2,
    kPhysicsError = 3,
    kNumericalError = 4,
    kDataError = 5,
};

/// Each command returns the report JSON it wrote (for tests and bindings).
report::json run_simulate(const config::ExperimentConfig& cfg);
report::json run_calibrate_spacing(const config::ExperimentConfig& cfg);
report::json run_solve_params(const config::ExperimentConfig& cfg);
report::json run_budget(const config::ExperimentConfig& cfg);
report::json run_certify(const config::ExperimentConfig& cfg, const std::string& input_path);

/// Dispatch + error mapping; prints a one-line error record to stderr on
/// failure and returns the exit code.
int run_command(const std::string& verb, const config::ExperimentConfig& cfg);

}  // namespace runner
}  // namespace quditls
