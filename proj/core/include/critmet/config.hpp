#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "critmet/error.hpp"

namespace critmet {

enum class Experiment { static_scaling, ramp_qfi, loschmidt, detuned, thermal, swap_check };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view name);

/// Flat key = value experiment description. Lists are comma separated;
/// '#' starts a comment.
struct ExperimentConfig {
  Experiment experiment = Experiment::static_scaling;
  std::vector<int> sizes;
  double j_z = 0.0;
  double delta = 1e-4;
  std::vector<double> lambdas{0.0};
  std::vector<double> temperatures;
  std::vector<double> times;
  std::vector<double> deltas{1e-2, 1e-3, 1e-4};  // swap_check extrapolation steps
  std::filesystem::path output_dir = "critmet_out";
  std::size_t dense_cutoff = std::size_t{1} << 12;
  std::uint64_t seed = 20190601;
  int threads = 0;  // 0 picks the hardware concurrency

  /// Every key as written back by the manifest, in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Parse or validation failure, pointing at the offending line and key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, int line, const std::string& field,
              const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// Parses and validates. Line numbers in errors are one-based; errors that
/// concern a missing key report line 0.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks sizes, grids and capacities for the chosen experiment against
/// the config's own dense cutoff.
void validate(const ExperimentConfig& c, const std::string& source = "<config>");

}  // namespace critmet
