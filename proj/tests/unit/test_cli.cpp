#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "critmet/config.hpp"
#include "critmet/sweep.hpp"

using namespace critmet;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

// Returns the ConfigError raised by parsing `text`, failing the test otherwise.
ConfigError parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e;
  }
  throw std::logic_error("config parsed without error:\n" + text);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("critmet_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesEveryKey) {
  const ExperimentConfig c = parse(
      "# comment line\n"
      "experiment = thermal\n"
      "sizes = 4, 6   # trailing comment\n"
      "j_z = -0.25\n"
      "delta = 1e-3\n"
      "lambdas = 0, 0.1\n"
      "temperatures = 0.5, 1\n"
      "times = 1, 2\n"
      "deltas = 0.01, 0.001\n"
      "output_dir = out/here\n"
      "dense_cutoff = 1024\n"
      "seed = 42\n"
      "threads = 2\n");
  EXPECT_EQ(c.experiment, Experiment::thermal);
  EXPECT_EQ(c.sizes, (std::vector<int>{4, 6}));
  EXPECT_EQ(c.j_z, -0.25);
  EXPECT_EQ(c.delta, 1e-3);
  EXPECT_EQ(c.lambdas, (std::vector<double>{0.0, 0.1}));
  EXPECT_EQ(c.temperatures, (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(c.output_dir, fs::path("out/here"));
  EXPECT_EQ(c.dense_cutoff, 1024u);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.threads, 2);
}

TEST(Config, Defaults) {
  const ExperimentConfig c = parse("experiment = static_scaling\nsizes = 4\n");
  EXPECT_EQ(c.delta, 1e-4);
  EXPECT_EQ(c.lambdas, std::vector<double>{0.0});
  EXPECT_EQ(c.dense_cutoff, 4096u);
  EXPECT_EQ(c.j_z, 0.0);
}

TEST(Config, EchoRoundTrips) {
  const ExperimentConfig c = parse(
      "experiment = swap_check\nsizes = 4\nj_z = 0.1\nlambda = 0.05\ndeltas = 0.01, 0.001\n");
  std::string text;
  for (const auto& [k, v] : c.echo()) text += k + " = " + v + "\n";
  EXPECT_EQ(parse(text).echo(), c.echo());
}

TEST(Config, ErrorsNameLineAndField) {
  struct Case {
    std::string text;
    int line;
    std::string field;
  };
  const std::vector<Case> cases{
      {"experiment = static_scaling\nsizes = 4\nbogus = 1\n", 3, "bogus"},
      {"experiment = static_scaling\nsizes = 4\nj_z = abc\n", 3, "j_z"},
      {"experiment = static_scaling\nsizes = 4, x\n", 2, "sizes"},
      {"experiment = nope\nsizes = 4\n", 1, "experiment"},
      {"experiment = static_scaling\nsizes = 4\nsizes = 6\n", 3, "sizes"},
      {"experiment = static_scaling\nsizes = 4\nlambda = 0\nlambdas = 0.1\n", 4, "lambdas"},
      {"experiment = static_scaling\nsizes = 4\njust text\n", 3, "just text"},
      {"experiment = static_scaling\n\nsizes =\n", 3, "sizes"},
      {"experiment = static_scaling\nsizes = 4, 5\n", 2, "sizes"},
      {"experiment = static_scaling\nsizes = 4, 4\n", 2, "sizes"},
      {"experiment = static_scaling\nsizes = 4\nj_z = 1\n", 3, "j_z"},
      {"experiment = static_scaling\nsizes = 4\ndelta = 0.5\n", 3, "delta"},
      {"experiment = static_scaling\nsizes = 4\nlambda = 0.1, 0.1\n", 3, "lambdas"},
      {"sizes = 4\n", 0, "experiment"},
      {"experiment = ramp_qfi\nsizes = 4\n", 0, "times"},
      {"experiment = ramp_qfi\nsizes = 4\ntimes = 1, -2\n", 3, "times"},
      {"experiment = thermal\nsizes = 4\n", 0, "temperatures"},
      {"experiment = thermal\nsizes = 14\ntemperatures = 1\n", 2, "sizes"},
      {"experiment = swap_check\nsizes = 8\n", 2, "sizes"},
      {"experiment = swap_check\nsizes = 4\ndeltas = 0.01\n", 3, "deltas"},
      {"experiment = static_scaling\nsizes = 4\nthreads = -1\n", 3, "threads"},
  };
  for (const Case& c : cases) {
    const ConfigError e = parse_error(c.text);
    EXPECT_EQ(e.line(), c.line) << c.text << " -> " << e.what();
    EXPECT_EQ(e.field(), c.field) << c.text << " -> " << e.what();
    EXPECT_NE(std::string(e.what()).find("test.cfg:"), std::string::npos);
  }
}

TEST(Config, EmptySizesRejected) {
  const ConfigError e = parse_error("experiment = static_scaling\nsizes = \n");
  EXPECT_EQ(e.field(), "sizes");
  ExperimentConfig c;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/critmet.cfg"), ConfigError);
}

TEST(Sweep, CsvHeadersAreStable) {
  EXPECT_EQ(csv_header(Experiment::static_scaling),
            (std::vector<std::string>{"N", "J_z", "lambda", "delta", "chi_f", "qfi", "delta_Mx",
                                      "delta_mx"}));
  EXPECT_EQ(csv_header(Experiment::detuned), csv_header(Experiment::static_scaling));
  EXPECT_EQ(csv_header(Experiment::ramp_qfi),
            (std::vector<std::string>{"N", "J_z", "t", "t_rescaled", "qfi", "qfi_rescaled", "bound",
                                      "delta_Mx"}));
  EXPECT_EQ(csv_header(Experiment::loschmidt), csv_header(Experiment::ramp_qfi));
  EXPECT_EQ(csv_header(Experiment::thermal),
            (std::vector<std::string>{"N", "J_z", "T", "lambda", "g_tilde", "exact_qfi", "delta_Mx",
                                      "delta_mx"}));
  EXPECT_EQ(csv_header(Experiment::swap_check),
            (std::vector<std::string>{"N", "J_z", "lambda", "delta", "swap_expectation",
                                      "fidelity_sq", "delta_swap", "ratio"}));
}

TEST(Sweep, ParallelForCoversEveryIndexAndRethrows) {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 2,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Sweep, VersionString) { EXPECT_FALSE(version().empty()); }

struct SweepCase {
  std::string name;
  std::string body;
  std::size_t points;
  std::vector<std::string> files;
};

class SweepRun : public ::testing::TestWithParam<SweepCase> {};

// Every experiment writes its CSV with the golden header, a manifest that
// lists each grid point once, and the plot files it announces.
TEST_P(SweepRun, WritesCompleteOutputs) {
  const SweepCase& sc = GetParam();
  const fs::path dir = scratch(sc.name);
  ExperimentConfig c = parse(sc.body + "output_dir = " + dir.string() + "\n");
  const RunSummary s = run_experiment(c);
  EXPECT_EQ(s.exit_code(), 0);
  EXPECT_EQ(s.points.size(), sc.points);

  std::string header;
  for (const auto& h : csv_header(c.experiment)) header += (header.empty() ? "" : ",") + h;
  EXPECT_EQ(first_line(dir / (std::string(to_string(c.experiment)) + ".csv")), header);

  const std::string csv = slurp(dir / (std::string(to_string(c.experiment)) + ".csv"));
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), sc.points + 1);

  const nlohmann::json m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["points_total"].get<std::size_t>(), sc.points);
  EXPECT_EQ(m["points"].size(), sc.points);
  EXPECT_EQ(m["points_failed"].get<int>(), 0);
  std::set<std::string> keys;
  for (const auto& p : m["points"]) keys.insert(p["key"].get<std::string>());
  EXPECT_EQ(keys.size(), sc.points);
  for (const char* k : {"tool", "version", "config", "tolerances", "wall_time_seconds", "files"}) {
    EXPECT_TRUE(m.contains(k)) << k;
  }
  for (const auto& f : m["files"]) EXPECT_TRUE(fs::exists(dir / f.get<std::string>())) << f;
  for (const auto& f : sc.files) EXPECT_TRUE(fs::exists(dir / f)) << f;
  fs::remove_all(dir);
}

INSTANTIATE_TEST_SUITE_P(
    Experiments, SweepRun,
    ::testing::Values(
        SweepCase{"static", "experiment = static_scaling\nsizes = 4, 6, 8\nlambdas = 0, 0.05\n", 6,
                  {"fits.csv", "plotdata/fig1a_inv_sqrt_qfi_lambda0.dat"}},
        SweepCase{"detuned", "experiment = detuned\nsizes = 4, 6, 8\nlambdas = 0.4\n", 3,
                  {"fits.csv", "plotdata/fig3_detune_inv_sqrt_qfi_lambda0.4.dat"}},
        SweepCase{"ramp", "experiment = ramp_qfi\nsizes = 4, 6\ntimes = 0.5, 2\n", 4,
                  {"plotdata/fig2_sqrt_qfi_N4.dat", "plotdata/fig2_bound_N6.dat"}},
        SweepCase{"loschmidt", "experiment = loschmidt\nsizes = 4\ntimes = 0.5, 2, 9\n", 3,
                  {"plotdata/fig3_le_sqrt_qfi_N4.dat"}},
        SweepCase{"thermal",
                  "experiment = thermal\nsizes = 4, 6\ntemperatures = 0.1, 1\nlambdas = 0, 0.1\n", 8,
                  {"plotdata/fig4_exact_qfi_N4_lambda0.dat", "plotdata/fig4_delta_mx_N6_lambda0.1.dat"}},
        SweepCase{"swap", "experiment = swap_check\nsizes = 2, 4\n", 6,
                  {"swap_limit.csv", "plotdata/appA_ratio_N4_lambda0.dat"}}),
    [](const auto& info) { return info.param.name; });

TEST(Sweep, PlotFilesHaveTwoColumns) {
  const fs::path dir = scratch("plot");
  ExperimentConfig c = parse("experiment = ramp_qfi\nsizes = 4\ntimes = 1, 2, 4\noutput_dir = " +
                             dir.string() + "\n");
  run_experiment(c);
  std::ifstream in(dir / "plotdata/fig2_sqrt_qfi_N4.dat");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double a = 0, b = 0;
    std::string extra;
    EXPECT_TRUE(static_cast<bool>(ss >> a >> b)) << line;
    EXPECT_FALSE(static_cast<bool>(ss >> extra)) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 3);
  fs::remove_all(dir);
}

TEST(Sweep, FailedPointsRecordedWithoutAborting) {
  // A shift of 0.1 on an eight-site chain leaves the small-shift regime.
  const fs::path dir = scratch("fail");
  ExperimentConfig c = parse("experiment = static_scaling\nsizes = 4, 8\ndelta = 0.1\noutput_dir = " +
                             dir.string() + "\n");
  const RunSummary s = run_experiment(c);
  const nlohmann::json m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["points_total"].get<std::size_t>(), 2u);
  EXPECT_EQ(m["points_failed"].get<std::size_t>(), s.failed());
  EXPECT_GE(s.failed(), 1u);
  EXPECT_EQ(s.exit_code(), 1);
  for (const auto& p : m["points"]) {
    if (p["status"] == "failed") EXPECT_FALSE(p["error"].get<std::string>().empty());
  }
  EXPECT_TRUE(fs::exists(dir / "static_scaling.csv"));
  fs::remove_all(dir);
}

// Two runs of the same config, one of them with more workers, write
// identical bytes.
TEST(Sweep, Deterministic) {
  for (const std::string body :
       {"experiment = static_scaling\nsizes = 4, 6, 8\nlambdas = 0, 0.1\n",
        "experiment = thermal\nsizes = 4, 6\ntemperatures = 0.2, 2\n",
        "experiment = loschmidt\nsizes = 4, 6\ntimes = 0.5, 5\n"}) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    ExperimentConfig ca = parse(body + "threads = 1\noutput_dir = " + a.string() + "\n");
    ExperimentConfig cb = parse(body + "threads = 3\noutput_dir = " + b.string() + "\n");
    run_experiment(ca);
    run_experiment(cb);
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
      const fs::path rel = fs::relative(entry.path(), a);
      EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
}
