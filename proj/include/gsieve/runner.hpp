#pragma once

// Experiment orchestration: runs one validated config to completion and
// emits <out>.report.json plus <out>.rows.csv. Reports embed the canonical
// config text, its digest, the seed, and the library version, so any report
// can be reproduced from itself; the timestamp is isolated in a single JSON
// field. Files are written via write-then-rename.

#include <filesystem>
#include <string>

#include "gsieve/config.hpp"

namespace gsieve {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct RunResult {
  int exit_code = 0;  // 0 success, 1 infeasible (cap/budget), 2 invalid config
  std::string message;
  std::string report_json;
  std::string rows_csv;
  std::filesystem::path report_path;
  std::filesystem::path csv_path;
};

/// Runs the experiment. Never throws: failures are reported through the
/// exit code and message. When `write_files` is set and the run succeeds,
/// the report and CSV land at cfg.out + ".report.json" / ".rows.csv".
RunResult run_experiment(const ExperimentConfig& cfg, bool write_files = true);

}  // namespace gsieve
