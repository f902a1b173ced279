// critmet: run metrology sweeps from a config file and print exponent tables.

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "critmet/config.hpp"
#include "critmet/model.hpp"
#include "critmet/scaling.hpp"
#include "critmet/sweep.hpp"

namespace {

constexpr int kUsageError = 2;

// CRITMET_DENSE_CUTOFF overrides the config's dense_cutoff when set.
bool apply_env_cutoff(critmet::ExperimentConfig& c) {
  const char* raw = std::getenv("CRITMET_DENSE_CUTOFF");
  if (!raw || !*raw) return true;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0' || v == 0) {
    std::cerr << "error: CRITMET_DENSE_CUTOFF must be a positive integer, got '" << raw << "'\n";
    return false;
  }
  c.dense_cutoff = static_cast<std::size_t>(v);
  return true;
}

int run(const std::string& path, int threads, bool quiet) {
  critmet::ExperimentConfig config;
  try {
    config = critmet::load_config(path);
    if (!apply_env_cutoff(config)) return kUsageError;
    if (threads > 0) config.threads = threads;
    critmet::validate(config, path);
  } catch (const critmet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  }

  const critmet::RunSummary summary = critmet::run_experiment(config, quiet ? nullptr : &std::cerr);
  std::cout << "points: " << summary.points.size() << ", failed: " << summary.failed()
            << ", wall time: " << std::setprecision(3) << summary.wall_seconds << " s\n";
  for (const auto& f : summary.files) std::cout << "  " << f.generic_string() << "\n";
  return summary.exit_code();
}

void print_row(const char* name, double value) {
  std::cout << "  " << std::left << std::setw(22) << name << std::setprecision(12) << value << "\n";
}

int predict(double jz, bool json) {
  if (!(std::abs(jz) < 1.0)) {
    std::cerr << "error: exponents need |j_z| < 1 (got " << jz << "); |j_z| = 1 is the BKT boundary\n";
    return kUsageError;
  }
  if (std::abs(jz) > 0.95) {
    std::cerr << "warning: |j_z| = " << std::abs(jz)
              << " is close to the BKT boundary; finite-size corrections grow large there\n";
  }
  if (json) {
    std::cout << critmet::exponent_table_json({jz}) << "\n";
    return 0;
  }
  const critmet::ExponentSet e = critmet::exponents_for(jz);
  std::cout << "exponents at j_z = " << jz << "\n";
  print_row("nu", e.nu);
  print_row("z", e.z);
  print_row("d", e.d);
  print_row("[h]", e.h_dim);
  print_row("theta", e.theta);
  print_row("G^1/2 ~ N^x", e.exp_qfi);
  print_row("Delta(Mx) ~ N^-x", e.exp_Mx);
  print_row("Delta(mx) ~ N^-x", e.exp_mx);
  print_row("t_ad ~ N^x", e.exp_time);
  print_row("std(H1) ~ N^x", e.exp_short_time_var);
  for (critmet::Regime r : {critmet::Regime::detuned, critmet::Regime::thermal}) {
    const critmet::CrossoverTable t = critmet::crossover_predictions(e, r);
    std::cout << (r == critmet::Regime::detuned ? "detuned, exponents of |lambda - lambda_c|\n"
                                                : "thermal, exponents of T\n");
    print_row("G^1/2", t.sqrt_qfi);
    print_row("chi_F", t.chi);
    print_row("Delta(Mx)", t.delta_Mx);
    print_row("Delta(mx)", t.delta_mx);
    print_row("d<mx>/dlambda", t.susceptibility_mx);
    print_row(r == critmet::Regime::detuned ? "xi" : "xi_T", t.length_scale);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Criticality-enhanced quantum metrology on the XXZ chain"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 0;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "Run the sweep described by a config file");
  run_cmd->add_option("config", config_path, "key = value config file")->required();
  run_cmd->add_option("--threads", threads, "Worker threads (overrides the config)")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("-q,--quiet", quiet, "No per-task progress on stderr");

  double jz = 0.0;
  bool json = false;
  auto* predict_cmd = app.add_subcommand("predict", "Print critical and crossover exponents");
  predict_cmd->add_option("--jz", jz, "Anisotropy J_z")->required();
  predict_cmd->add_flag("--json", json, "Emit JSON instead of a table");

  app.add_subcommand("version", "Print the tool version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, threads, quiet);
    if (*predict_cmd) return predict(jz, json);
    std::cout << "critmet " << critmet::version() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
