#include "critmet/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "critmet/model.hpp"

namespace critmet {

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::static_scaling: return "static_scaling";
    case Experiment::ramp_qfi: return "ramp_qfi";
    case Experiment::loschmidt: return "loschmidt";
    case Experiment::detuned: return "detuned";
    case Experiment::thermal: return "thermal";
    case Experiment::swap_check: return "swap_check";
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::static_scaling, Experiment::ramp_qfi, Experiment::loschmidt,
                       Experiment::detuned, Experiment::thermal, Experiment::swap_check}) {
    if (to_string(e) == name) return e;
  }
  throw DomainError("unknown experiment '" + std::string(name) + "'");
}

ConfigError::ConfigError(const std::string& source, int line, const std::string& field,
                         const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": field '" + field + "': " + message),
      line_(line),
      field_(field) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

struct Parser {
  const std::string& source;
  int line;
  std::string key;

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(source, line, key, msg); }

  double real(std::string_view text) const {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
      fail("expected a finite number, got '" + t + "'");
    }
    return v;
  }

  long long integer(std::string_view text) const {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      fail("expected an integer, got '" + t + "'");
    }
    return v;
  }

  template <class F>
  auto list(std::string_view text, F item) const {
    std::vector<decltype(item(text))> out;
    if (trim(text).empty()) return out;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      out.push_back(item(text.substr(start, comma == std::string_view::npos ? text.npos
                                                                            : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }
};

}  // namespace

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  return {
      {"experiment", std::string(to_string(experiment))},
      {"sizes", join(sizes)},
      {"j_z", format_double(j_z)},
      {"delta", format_double(delta)},
      {"lambdas", join(lambdas)},
      {"temperatures", join(temperatures)},
      {"times", join(times)},
      {"deltas", join(deltas)},
      {"output_dir", output_dir.generic_string()},
      {"dense_cutoff", std::to_string(dense_cutoff)},
      {"seed", std::to_string(seed)},
      {"threads", std::to_string(threads)},
  };
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig c;
  std::map<std::string, int> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source, line_no, trim(line), "expected 'key = value'");
    }
    Parser p{source, line_no, trim(std::string_view(line).substr(0, eq))};
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (p.key.empty()) p.fail("empty key");
    // "lambda" is an alias; track it under the field name validation reports.
    const std::string canonical = p.key == "lambda" ? "lambdas" : p.key;
    if (auto [it, fresh] = seen.emplace(canonical, line_no); !fresh) {
      p.fail("duplicate key (first set on line " + std::to_string(it->second) + ")");
    }
    auto real = [&](std::string_view t) { return p.real(t); };

    if (p.key == "experiment") {
      try {
        c.experiment = parse_experiment(value);
      } catch (const DomainError& e) {
        p.fail(e.what());
      }
    } else if (p.key == "sizes") {
      c.sizes = p.list(value, [&](std::string_view t) {
        const long long v = p.integer(t);
        if (v < 2 || v > 30) p.fail("sizes must lie in [2, 30]");
        return static_cast<int>(v);
      });
    } else if (p.key == "j_z") {
      c.j_z = p.real(value);
    } else if (p.key == "delta") {
      c.delta = p.real(value);
    } else if (p.key == "lambda" || p.key == "lambdas") {
      c.lambdas = p.list(value, real);
    } else if (p.key == "temperatures") {
      c.temperatures = p.list(value, real);
    } else if (p.key == "times") {
      c.times = p.list(value, real);
    } else if (p.key == "deltas") {
      c.deltas = p.list(value, real);
    } else if (p.key == "output_dir") {
      if (value.empty()) p.fail("empty path");
      c.output_dir = value;
    } else if (p.key == "dense_cutoff") {
      const long long v = p.integer(value);
      if (v < 1) p.fail("must be positive");
      c.dense_cutoff = static_cast<std::size_t>(v);
    } else if (p.key == "seed") {
      const long long v = p.integer(value);
      if (v < 0) p.fail("must be non-negative");
      c.seed = static_cast<std::uint64_t>(v);
    } else if (p.key == "threads") {
      const long long v = p.integer(value);
      if (v < 0 || v > 1024) p.fail("must lie in [0, 1024]");
      c.threads = static_cast<int>(v);
    } else {
      p.fail("unknown key");
    }
  }

  auto line_of = [&](const std::string& key) {
    const auto it = seen.find(key);
    return it == seen.end() ? 0 : it->second;
  };
  if (!seen.count("experiment")) throw ConfigError(source, 0, "experiment", "missing required key");
  try {
    validate(c, source);
  } catch (const ConfigError& e) {
    // Re-anchor validation errors on the line that set the field.
    const int line = e.line() != 0 ? e.line() : line_of(e.field());
    std::string msg = e.what();
    msg = msg.substr(msg.find("': ") + 3);
    throw ConfigError(source, line, e.field(), msg);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "<file>", "cannot open config file");
  return parse_config(in, path.string());
}

void validate(const ExperimentConfig& c, const std::string& source) {
  auto fail = [&](const std::string& field, const std::string& msg) {
    throw ConfigError(source, 0, field, msg);
  };
  if (c.sizes.empty()) fail("sizes", "at least one size is required");
  for (int n : c.sizes) {
    if (n % 2 != 0) fail("sizes", "sizes must be even (got " + std::to_string(n) + ")");
    if ((std::size_t{1} << n) > max_sparse_dim()) {
      fail("sizes", "N = " + std::to_string(n) + " exceeds the sparse capacity");
    }
  }
  auto sorted_unique = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  {
    std::vector<int> s = c.sizes;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) fail("sizes", "duplicate size");
  }
  if (!(std::abs(c.j_z) < 1.0)) fail("j_z", "critical-regime experiments need |j_z| < 1");
  if (!(c.delta > 0.0) || c.delta > 0.1) fail("delta", "must lie in (0, 0.1]");
  if (c.lambdas.empty()) fail("lambdas", "grid is empty");
  if (!sorted_unique(c.lambdas)) fail("lambdas", "duplicate value");

  const std::size_t largest = std::size_t{1} << *std::max_element(c.sizes.begin(), c.sizes.end());
  switch (c.experiment) {
    case Experiment::static_scaling:
    case Experiment::detuned:
      break;
    case Experiment::ramp_qfi:
    case Experiment::loschmidt:
      if (c.times.empty()) fail("times", "grid is empty");
      for (double t : c.times) {
        if (!(t > 0.0)) fail("times", "times must be positive");
      }
      if (!sorted_unique(c.times)) fail("times", "duplicate value");
      break;
    case Experiment::thermal:
      if (c.temperatures.empty()) fail("temperatures", "grid is empty");
      for (double t : c.temperatures) {
        if (!(t > 0.0)) fail("temperatures", "temperatures must be positive");
      }
      if (!sorted_unique(c.temperatures)) fail("temperatures", "duplicate value");
      if (largest > c.dense_cutoff) fail("sizes", "thermal sizes exceed dense_cutoff");
      break;
    case Experiment::swap_check:
      if (c.deltas.size() < 2) fail("deltas", "need at least two steps to extrapolate");
      for (double d : c.deltas) {
        if (!(d > 0.0)) fail("deltas", "steps must be positive");
      }
      if (!sorted_unique(c.deltas)) fail("deltas", "duplicate value");
      if (largest * largest > c.dense_cutoff) {
        fail("sizes", "doubled register exceeds dense_cutoff");
      }
      break;
  }
}

}  // namespace critmet
