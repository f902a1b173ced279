#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "critmet/config.hpp"

namespace critmet {

std::string_view version();

struct PointStatus {
  std::string key;
  bool ok = false;
  std::string error;
};

struct RunSummary {
  std::vector<PointStatus> points;
  std::vector<std::filesystem::path> files;
  double wall_seconds = 0.0;

  std::size_t failed() const;
  int exit_code() const { return failed() == 0 ? 0 : 1; }
};

/// Runs fn(0..n-1) on up to `threads` workers pulling indices from a shared
/// counter. Exceptions from fn are rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Column headers of the main CSV for an experiment.
std::vector<std::string> csv_header(Experiment e);

/// Runs every grid point of the config and writes <output_dir>/<experiment>.csv,
/// auxiliary CSVs, plotdata/*.dat and manifest.json. Per-point failures are
/// recorded, not thrown. Progress lines go to `log` when given.
RunSummary run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace critmet
