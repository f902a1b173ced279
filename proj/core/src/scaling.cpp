#include "critmet/scaling.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "critmet/error.hpp"
#include "critmet/metrology.hpp"

namespace critmet {

ExponentSet exponents_for(double j_z) {
  if (!(std::abs(j_z) < 1.0)) {
    throw DomainError("exponents are defined for |j_z| < 1 (got " + std::to_string(j_z) + ")");
  }
  ExponentSet e;
  e.j_z = j_z;
  e.h_dim = std::acos(j_z) / (2.0 * std::numbers::pi);
  const double inv_nu = e.d + e.z - e.h_dim;
  e.nu = 1.0 / inv_nu;
  // Ratios of exact sums keep the j_z = 0 values correctly rounded.
  e.theta = (e.d + e.z - 2.0 * e.h_dim) / inv_nu;
  e.exp_qfi = inv_nu / e.d;
  e.exp_Mx = e.exp_qfi;
  e.exp_mx = e.exp_qfi - e.h_dim / e.d;
  e.exp_time = e.z / e.d;
  e.exp_short_time_var = 1.0 - e.h_dim / e.d;
  return e;
}

PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys,
                          std::optional<std::pair<double, double>> window) {
  if (xs.size() != ys.size()) throw DomainError("fit abscissae and values differ in length");
  std::vector<double> lx, ly;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (window && (xs[i] < window->first || xs[i] > window->second)) continue;
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("power-law fit needs positive data");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
    lo = std::min(lo, xs[i]);
    hi = std::max(hi, xs[i]);
  }
  const auto n = static_cast<double>(lx.size());
  if (lx.size() < 3) throw DomainError("power-law fit needs at least three points in the window");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("power-law fit needs distinct abscissae");

  PowerLawFit f;
  f.exponent = sxy / sxx;
  f.prefactor_log = my - f.exponent * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (f.prefactor_log + f.exponent * lx[i]);
    ssr += r * r;
  }
  f.std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.window = {lo, hi};
  f.points = static_cast<int>(lx.size());
  return f;
}

std::pair<double, double> default_window(const std::vector<double>& xs) {
  if (xs.empty()) throw DomainError("no abscissae");
  const double hi = *std::max_element(xs.begin(), xs.end());
  return {hi / 10.0, hi};
}

TimeSeries collapse_transform(const TimeSeries& series, const ExponentSet& e, CollapseMode mode) {
  if (!series.n_sites) throw DomainError("collapse needs the system size attached to the series");
  series.validate();
  const double n = *series.n_sites;
  const double time_scale = std::pow(n, e.exp_time);
  const double value_scale = std::pow(n, e.exp_qfi);
  TimeSeries out = series;
  out.label = series.label + "_rescaled";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out.times[i] = series.times[i] / time_scale;
    out.values[i] = mode == CollapseMode::fig2_precision ? series.values[i] * value_scale
                                                         : series.values[i] / value_scale;
  }
  return out;
}

CrossoverTable crossover_predictions(const ExponentSet& e, Regime regime) {
  const double dnu = e.d * e.nu;
  CrossoverTable t;
  t.regime = regime;
  // Detuned exponents are in |lambda - lambda_c|; thermal ones in T, through
  // |lambda - lambda_c| -> T^{1/z nu}.
  const double conv = regime == Regime::detuned ? 1.0 : 1.0 / (e.z * e.nu);
  t.sqrt_qfi = (dnu / 2.0 - 1.0) * conv;
  t.chi = (dnu - 2.0) * conv;
  t.delta_Mx = (1.0 - dnu / 2.0) * conv;
  t.delta_mx = e.theta * conv;
  t.susceptibility_mx = -e.theta * conv;
  t.length_scale = regime == Regime::detuned ? -e.nu : -1.0 / e.z;
  return t;
}

std::string_view to_string(Regime r) { return r == Regime::detuned ? "detuned" : "thermal"; }

std::string_view to_string(CollapseMode m) {
  switch (m) {
    case CollapseMode::fig2_time: return "fig2_time";
    case CollapseMode::fig2_precision: return "fig2_precision";
    case CollapseMode::fig3_le: return "fig3_le";
  }
  return "unknown";
}

std::string exponent_table_json(const std::vector<double>& j_z_values, int indent) {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (double jz : j_z_values) {
    const ExponentSet e = exponents_for(jz);
    nlohmann::ordered_json entry;
    entry["j_z"] = e.j_z;
    entry["nu"] = e.nu;
    entry["z"] = e.z;
    entry["d"] = e.d;
    entry["h_dim"] = e.h_dim;
    entry["theta"] = e.theta;
    entry["exp_qfi"] = e.exp_qfi;
    entry["exp_Mx"] = e.exp_Mx;
    entry["exp_mx"] = e.exp_mx;
    entry["exp_time"] = e.exp_time;
    entry["exp_short_time_var"] = e.exp_short_time_var;
    for (Regime r : {Regime::detuned, Regime::thermal}) {
      const CrossoverTable t = crossover_predictions(e, r);
      nlohmann::ordered_json c;
      c["sqrt_qfi"] = t.sqrt_qfi;
      c["chi"] = t.chi;
      c["delta_Mx"] = t.delta_Mx;
      c["delta_mx"] = t.delta_mx;
      c["susceptibility_mx"] = t.susceptibility_mx;
      c["length_scale"] = t.length_scale;
      c["n_sqrt_qfi"] = t.n_sqrt_qfi;
      c["n_chi"] = t.n_chi;
      c["n_delta_Mx"] = t.n_delta_Mx;
      c["n_delta_mx"] = t.n_delta_mx;
      entry[std::string(to_string(r))] = c;
    }
    std::ostringstream key;
    key << jz;
    root[key.str()] = entry;
  }
  return root.dump(indent);
}

double connected_correlator(const ChainParams& p, const PureState& gs, int r) {
  if (r < 1 || r >= p.n_sites) throw DomainError("correlator distance out of range");
  const int a = (p.n_sites - r) / 2 + 1;
  const int b = a + r;
  const SparseHermitian sa = build_local_h(p, a);
  const SparseHermitian sb = build_local_h(p, b);
  const Vector bv = sb.apply(gs.amplitudes());
  const double joint = gs.amplitudes().dot(sa.apply(bv)).real();
  return joint - sa.expectation(gs.amplitudes()) * sb.expectation(gs.amplitudes());
}

PowerLawFit correlation_diagnostic(const ChainParams& p) {
  GroundStateCache cache(p);
  const PureState& gs = cache.state(p.field);
  std::vector<double> rs, cs;
  for (int r = 2; r <= std::max(4, p.n_sites / 4); ++r) {
    rs.push_back(r);
    cs.push_back(std::abs(connected_correlator(p, gs, r)));
  }
  return fit_power_law(rs, cs);
}

}  // namespace critmet
