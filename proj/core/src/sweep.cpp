#include "critmet/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "critmet/dynamics.hpp"
#include "critmet/metrology.hpp"
#include "critmet/scaling.hpp"
#include "critmet/thermal.hpp"

extern "C" void openblas_set_num_threads(int);

namespace critmet {

#ifndef CRITMET_VERSION
#define CRITMET_VERSION "0.0.0"
#endif

std::string_view version() { return CRITMET_VERSION; }

std::size_t RunSummary::failed() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const PointStatus& p) { return !p.ok; }));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::string> csv_header(Experiment e) {
  switch (e) {
    case Experiment::static_scaling:
    case Experiment::detuned:
      return {"N", "J_z", "lambda", "delta", "chi_f", "qfi", "delta_Mx", "delta_mx"};
    case Experiment::ramp_qfi:
    case Experiment::loschmidt:
      return {"N", "J_z", "t", "t_rescaled", "qfi", "qfi_rescaled", "bound", "delta_Mx"};
    case Experiment::thermal:
      return {"N", "J_z", "T", "lambda", "g_tilde", "exact_qfi", "delta_Mx", "delta_mx"};
    case Experiment::swap_check:
      return {"N", "J_z", "lambda", "delta", "swap_expectation", "fidelity_sq", "delta_swap",
              "ratio"};
  }
  return {};
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

using Row = std::vector<double>;

// A unit of work covering one or more grid points that share expensive
// state (a ground state, a set of spectra, a propagation).
struct Task {
  std::vector<std::string> keys;
  std::function<std::vector<Row>()> run;
};

struct TaskResult {
  std::vector<Row> rows;
  std::string error;
  bool ok = false;
};

std::string key_of(std::initializer_list<std::pair<const char*, double>> parts) {
  std::string out;
  for (const auto& [name, value] : parts) {
    if (!out.empty()) out += ",";
    out += name;
    out += "=";
    out += num(value);
  }
  return out;
}

FiniteDifference fd_for(const ExperimentConfig& c) { return FiniteDifference{c.delta}; }

std::vector<Task> build_tasks(const ExperimentConfig& c) {
  std::vector<Task> tasks;
  const ExponentSet e = exponents_for(c.j_z);
  const LanczosOptions lanczos{.seed = c.seed};
  std::vector<int> sizes = c.sizes;
  std::sort(sizes.begin(), sizes.end());
  std::vector<double> lambdas = c.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<double> times = c.times;
  std::sort(times.begin(), times.end());
  std::vector<double> temps = c.temperatures;
  std::sort(temps.begin(), temps.end());
  std::vector<double> deltas = c.deltas;
  std::sort(deltas.begin(), deltas.end());

  switch (c.experiment) {
    case Experiment::static_scaling:
    case Experiment::detuned:
      for (int n : sizes) {
        for (double lambda : lambdas) {
          tasks.push_back({{key_of({{"N", n}, {"lambda", lambda}})}, [=] {
                             const ChainParams p{n, c.j_z, lambda};
                             GroundStateCache cache(p, kDefaultEigenTol, lanczos);
                             const FiniteDifference fd = fd_for(c);
                             const auto chi = chi_finite_difference(p, fd, &cache);
                             const auto big =
                                 error_propagation(p, build_h1(p), ObservableTag::Mx, fd, &cache);
                             const auto small = error_propagation(
                                 p, build_local_h(p, center_site(n)), ObservableTag::mx, fd, &cache);
                             return std::vector<Row>{{double(n), c.j_z, lambda, chi.delta_used,
                                                      chi.chi_f, chi.qfi, big.delta, small.delta}};
                           }});
        }
      }
      break;
    case Experiment::ramp_qfi:
      for (int n : sizes) {
        for (double t : times) {
          tasks.push_back({{key_of({{"N", n}, {"t", t}})}, [=] {
                             const ChainParams p{n, c.j_z, lambdas.front()};
                             GroundStateCache cache(p, kDefaultEigenTol, lanczos);
                             const PureState& gs = cache.state(p.field);
                             const RampProtocol r{c.delta, t};
                             const double g = qfi_time(p, r, gs);
                             const double delta_mx =
                                 precision_time(p, Quench::ramp, build_h1(p), {t}, fd_for(c), &gs)
                                     .values.front();
                             return std::vector<Row>{{double(n), c.j_z, t,
                                                      t / std::pow(n, e.exp_time), g,
                                                      std::sqrt(g) / std::pow(n, e.exp_qfi),
                                                      speed_limit_bound(p, r, gs), delta_mx}};
                           }});
        }
      }
      break;
    case Experiment::loschmidt:
      for (int n : sizes) {
        Task task;
        for (double t : times) task.keys.push_back(key_of({{"N", n}, {"t", t}}));
        task.run = [=] {
          const ChainParams p{n, c.j_z, lambdas.front()};
          GroundStateCache cache(p, kDefaultEigenTol, lanczos);
          const PureState& gs = cache.state(p.field);
          const TimeSeries g = qfi_loschmidt(p, times, fd_for(c), &gs);
          const TimeSeries prec =
              precision_time(p, Quench::sudden, build_h1(p), times, fd_for(c), &gs);
          std::vector<Row> rows;
          for (std::size_t i = 0; i < times.size(); ++i) {
            const double t = times[i];
            rows.push_back({double(n), c.j_z, t, t / std::pow(n, e.exp_time), g.values[i],
                            std::sqrt(g.values[i]) / std::pow(n, e.exp_qfi),
                            speed_limit(t, 1.0, p, gs), prec.values[i]});
          }
          return rows;
        };
        tasks.push_back(std::move(task));
      }
      break;
    case Experiment::thermal:
      for (int n : sizes) {
        for (double lambda : lambdas) {
          Task task;
          for (double t : temps) task.keys.push_back(key_of({{"N", n}, {"T", t}, {"lambda", lambda}}));
          task.run = [=] {
            const ChainParams p{n, c.j_z, lambda};
            ThermalFamily family(p);
            const FiniteDifference fd = fd_for(c);
            const auto big = thermal_precision(p, temps, build_h1(p), ObservableTag::Mx, fd, &family);
            const auto small = thermal_precision(p, temps, build_local_h(p, center_site(n)),
                                                 ObservableTag::mx, fd, &family);
            std::vector<Row> rows;
            for (std::size_t i = 0; i < temps.size(); ++i) {
              const ThermalQfi q = thermal_qfi_bounds(p, temps[i], fd, &family);
              rows.push_back({double(n), c.j_z, temps[i], lambda, q.g_tilde, q.exact_qfi,
                              big[i].delta, small[i].delta});
            }
            return rows;
          };
          tasks.push_back(std::move(task));
        }
      }
      break;
    case Experiment::swap_check:
      for (int n : sizes) {
        for (double lambda : lambdas) {
          Task task;
          for (double d : deltas) {
            task.keys.push_back(key_of({{"N", n}, {"lambda", lambda}, {"delta", d}}));
          }
          task.run = [=] {
            const ChainParams p{n, c.j_z, lambda};
            GroundStateCache cache(p, 1e-12, lanczos);
            const double qfi = chi_finite_difference(p, fd_for(c), &cache).qfi;
            std::vector<Row> rows;
            for (double d : deltas) {
              const SwapResult s = swap_estimator(p, d, &cache);
              rows.push_back({double(n), c.j_z, lambda, d, s.swap_expectation,
                              s.fidelity * s.fidelity, s.precision.delta,
                              s.precision.delta * std::sqrt(qfi / 2.0)});
            }
            return rows;
          };
          tasks.push_back(std::move(task));
        }
      }
      break;
  }
  return tasks;
}

class OutputWriter {
 public:
  explicit OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_ / "plotdata");
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::string text;
    for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
    text += "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + row[i];
      text += "\n";
    }
    write(dir_ / name, text);
  }

  void plot(const std::string& name, const std::vector<double>& xs, const std::vector<double>& ys) {
    std::string text;
    for (std::size_t i = 0; i < xs.size(); ++i) text += num(xs[i]) + " " + num(ys[i]) + "\n";
    write(dir_ / "plotdata" / name, text);
  }

  void raw(const std::string& name, const std::string& text) { write(dir_ / name, text); }

  std::vector<std::filesystem::path> files;

 private:
  void write(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write " + path.string());
    files.push_back(path);
  }

  std::filesystem::path dir_;
};

std::vector<std::string> format_row(const Row& row) {
  std::vector<std::string> out;
  for (double v : row) out.push_back(num(v));
  return out;
}

// Groups rows by a column, keeping first-seen order.
std::map<double, std::vector<const Row*>> group_by(const std::vector<const Row*>& rows,
                                                   std::size_t column) {
  std::map<double, std::vector<const Row*>> out;
  for (const Row* r : rows) out[(*r)[column]].push_back(r);
  return out;
}

std::string tag(const char* name, double v) { return std::string(name) + num(v); }

void write_derived(const ExperimentConfig& c, const std::vector<const Row*>& rows,
                   OutputWriter& out) {
  const ExponentSet e = exponents_for(c.j_z);
  switch (c.experiment) {
    case Experiment::static_scaling:
    case Experiment::detuned: {
      std::vector<std::vector<std::string>> fits;
      const char* panel = c.experiment == Experiment::static_scaling ? "fig1a" : "fig3_detune";
      for (const auto& [lambda, group] : group_by(rows, 2)) {
        std::vector<double> ns, inv_sqrt_qfi, big, small;
        for (const Row* r : group) {
          ns.push_back((*r)[0]);
          inv_sqrt_qfi.push_back(1.0 / std::sqrt((*r)[5]));
          big.push_back((*r)[6]);
          small.push_back((*r)[7]);
        }
        const std::string suffix = "_" + tag("lambda", lambda) + ".dat";
        out.plot(std::string(panel) + "_inv_sqrt_qfi" + suffix, ns, inv_sqrt_qfi);
        out.plot(std::string(panel) + "_delta_Mx" + suffix, ns, big);
        out.plot(std::string(panel) + "_delta_mx" + suffix, ns, small);
        if (ns.size() < 3) continue;
        const bool critical = lambda == 0.0;
        const std::vector<std::pair<std::string, std::pair<const std::vector<double>*, double>>>
            quantities{
                {"inv_sqrt_qfi", {&inv_sqrt_qfi, critical ? -e.exp_qfi : -0.5}},
                {"delta_Mx", {&big, critical ? -e.exp_Mx : -0.5}},
                {"delta_mx", {&small, critical ? -e.exp_mx : 0.0}},
            };
        for (const auto& [name, data] : quantities) {
          const PowerLawFit f = fit_power_law(ns, *data.first, default_window(ns));
          fits.push_back({num(lambda), name, num(f.exponent), num(f.std_error),
                          num(f.window.first), num(f.window.second), num(f.r_squared),
                          std::to_string(f.points), num(data.second)});
        }
      }
      out.csv("fits.csv",
              {"lambda", "quantity", "exponent", "std_error", "window_min", "window_max",
               "r_squared", "points", "expected"},
              fits);
      break;
    }
    case Experiment::ramp_qfi:
    case Experiment::loschmidt: {
      const bool ramp = c.experiment == Experiment::ramp_qfi;
      for (const auto& [n, group] : group_by(rows, 0)) {
        TimeSeries g{{}, {}, "sqrt_qfi", static_cast<int>(n)};
        TimeSeries bound{{}, {}, "bound", static_cast<int>(n)};
        TimeSeries prec{{}, {}, "delta_Mx", static_cast<int>(n)};
        for (const Row* r : group) {
          for (TimeSeries* s : {&g, &bound, &prec}) s->times.push_back((*r)[2]);
          g.values.push_back(std::sqrt((*r)[4]));
          bound.values.push_back((*r)[6]);
          prec.values.push_back((*r)[7]);
        }
        const CollapseMode mode = ramp ? CollapseMode::fig2_time : CollapseMode::fig3_le;
        const std::string panel = ramp ? "fig2" : "fig3_le";
        const std::string suffix = "_" + tag("N", n) + ".dat";
        const TimeSeries cg = collapse_transform(g, e, mode);
        const TimeSeries cb = collapse_transform(bound, e, mode);
        const TimeSeries cp = collapse_transform(prec, e, CollapseMode::fig2_precision);
        out.plot(panel + "_sqrt_qfi" + suffix, cg.times, cg.values);
        out.plot(panel + "_bound" + suffix, cb.times, cb.values);
        out.plot(panel + "_delta_Mx" + suffix, cp.times, cp.values);
      }
      break;
    }
    case Experiment::thermal: {
      for (const auto& [n, group] : group_by(rows, 0)) {
        for (const auto& [lambda, sub] : group_by(group, 3)) {
          std::vector<double> ts, qfi, g_tilde, big, small;
          for (const Row* r : sub) {
            ts.push_back((*r)[2]);
            g_tilde.push_back((*r)[4]);
            qfi.push_back((*r)[5]);
            big.push_back((*r)[6]);
            small.push_back((*r)[7]);
          }
          const std::string suffix = "_" + tag("N", n) + "_" + tag("lambda", lambda) + ".dat";
          out.plot("fig4_exact_qfi" + suffix, ts, qfi);
          out.plot("fig4_g_tilde" + suffix, ts, g_tilde);
          out.plot("fig4_delta_Mx" + suffix, ts, big);
          out.plot("fig4_delta_mx" + suffix, ts, small);
        }
      }
      break;
    }
    case Experiment::swap_check: {
      std::vector<std::vector<std::string>> limits;
      for (const auto& [n, group] : group_by(rows, 0)) {
        for (const auto& [lambda, sub] : group_by(group, 2)) {
          std::vector<double> ds, ratios;
          for (const Row* r : sub) {
            ds.push_back((*r)[3]);
            ratios.push_back((*r)[7]);
          }
          out.plot("appA_ratio_" + tag("N", n) + "_" + tag("lambda", lambda) + ".dat", ds, ratios);
          if (ds.size() >= 2) {
            limits.push_back({num(n), num(c.j_z), num(lambda),
                              num(extrapolate_to_zero(ds, ratios))});
          }
        }
      }
      out.csv("swap_limit.csv", {"N", "J_z", "lambda", "ratio_extrapolated"}, limits);
      break;
    }
  }
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t saved_cutoff = dense_cutoff();
  set_dense_cutoff(config.dense_cutoff);
  struct Restore {
    std::size_t cutoff;
    ~Restore() { set_dense_cutoff(cutoff); }
  } restore{saved_cutoff};

  const int threads = config.threads > 0
                          ? config.threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (threads > 1) openblas_set_num_threads(1);

  const std::vector<Task> tasks = build_tasks(config);
  std::vector<TaskResult> results(tasks.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> finished{0};
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    TaskResult& r = results[i];
    try {
      r.rows = tasks[i].run();
      r.ok = true;
    } catch (const std::exception& ex) {
      r.error = ex.what();
    }
    if (log) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::lock_guard lock(log_mutex);
      *log << "[" << ++finished << "/" << tasks.size() << "] " << tasks[i].keys.front()
           << (tasks[i].keys.size() > 1 ? " (+" + std::to_string(tasks[i].keys.size() - 1) + ")"
                                        : std::string())
           << (r.ok ? " ok" : " FAILED: " + r.error) << " (" << num(secs) << " s)\n";
    }
  });

  RunSummary summary;
  std::vector<std::vector<std::string>> csv_rows;
  std::vector<const Row*> ok_rows;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (const std::string& key : tasks[i].keys) {
      summary.points.push_back({key, results[i].ok, results[i].error});
    }
    for (const Row& row : results[i].rows) {
      csv_rows.push_back(format_row(row));
      ok_rows.push_back(&row);
    }
  }

  OutputWriter out(config.output_dir);
  out.csv(std::string(to_string(config.experiment)) + ".csv", csv_header(config.experiment),
          csv_rows);
  write_derived(config, ok_rows, out);
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::ordered_json manifest;
  manifest["tool"] = "critmet";
  manifest["version"] = std::string(version());
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.echo()) echo[k] = v;
  manifest["config"] = echo;
  manifest["tolerances"] = {
      {"eigen_tol", kDefaultEigenTol},
      {"fd_delta", config.delta},
      {"fd_rel_tol", FiniteDifference{}.rel_tol},
      {"fd_max_halvings", FiniteDifference{}.max_halvings},
      {"krylov_tol", EvolutionOptions{}.krylov_tol},
      {"ramp_converge_abs", EvolutionOptions{}.converge_abs},
      {"ramp_converge_rel", EvolutionOptions{}.converge_rel},
      {"dense_cutoff", config.dense_cutoff},
  };
  manifest["threads"] = threads;
  manifest["wall_time_seconds"] = summary.wall_seconds;
  manifest["points_total"] = summary.points.size();
  manifest["points_failed"] = summary.failed();
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (const PointStatus& p : summary.points) {
    nlohmann::ordered_json entry;
    entry["key"] = p.key;
    entry["status"] = p.ok ? "ok" : "failed";
    if (!p.ok) entry["error"] = p.error;
    points.push_back(entry);
  }
  manifest["points"] = points;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& f : out.files) {
    files.push_back(std::filesystem::relative(f, config.output_dir).generic_string());
  }
  files.push_back("manifest.json");
  manifest["files"] = files;
  out.raw("manifest.json", manifest.dump(2) + "\n");

  summary.files = out.files;
  return summary;
}

}  // namespace critmet
