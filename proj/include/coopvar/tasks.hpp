#pragma once

#include <string>

#include "coopvar/config.hpp"

namespace coopvar {

struct TaskOutcome {
  int exit_code = 0;  // 0 ok, 2 validation error, 3 numerical failure
  std::string error;
};

/// Builds the system, runs the configured task, and writes its artifacts plus
/// a manifest into out_dir. Validation failures write nothing; numerical
/// failures still write the manifest and an error report.
TaskOutcome run_task(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace coopvar
