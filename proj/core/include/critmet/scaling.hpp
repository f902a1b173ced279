#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "critmet/dynamics.hpp"
#include "critmet/model.hpp"

namespace critmet {

/// Critical exponents of the chain at anisotropy j_z and the scaling
/// exponents derived from them.
struct ExponentSet {
  double j_z = 0.0;
  double nu = 0.0;
  double z = 1.0;
  int d = 1;
  double h_dim = 0.0;              // [h] = arccos(j_z) / 2 pi
  double theta = 0.0;              // 1 - [h] nu
  double exp_qfi = 0.0;            // 1 / d nu, for G^{1/2}(N)
  double exp_Mx = 0.0;             // 1 / d nu
  double exp_mx = 0.0;             // 1 / d nu - [h] / d
  double exp_time = 0.0;           // z / d
  double exp_short_time_var = 0.0; // 1 - [h] / d, for std(H1)(N)
};

/// Closed-form exponents; throws DomainError unless |j_z| < 1.
ExponentSet exponents_for(double j_z);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor_log = 0.0;
  double std_error = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  double r_squared = 0.0;
  int points = 0;
};

/// Least squares of log y on log x over the points with x inside the window
/// (all points when absent). Throws DomainError for non-positive data or
/// fewer than three points.
PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys,
                          std::optional<std::pair<double, double>> window = std::nullopt);

/// The largest decade of abscissae, [max/10, max].
std::pair<double, double> default_window(const std::vector<double>& xs);

enum class CollapseMode { fig2_time, fig2_precision, fig3_le };

/// t -> t / N^{z/d}; values are G^{1/2}-like and divided by N^{1/d nu}
/// (fig2_time, fig3_le) or precision-like and multiplied by N^{1/d nu}
/// (fig2_precision). Requires series.n_sites.
TimeSeries collapse_transform(const TimeSeries& series, const ExponentSet& e, CollapseMode mode);

enum class Regime { detuned, thermal };

/// Exponents of the control variable (|lambda - lambda_c| or T) and of N in
/// the off-critical or thermal regime.
struct CrossoverTable {
  Regime regime = Regime::detuned;
  double sqrt_qfi = 0.0;
  double chi = 0.0;
  double delta_Mx = 0.0;
  double delta_mx = 0.0;
  double susceptibility_mx = 0.0;  // d<h>/dlambda
  double length_scale = 0.0;       // xi ~ |lambda|^{-nu} or xi_T ~ T^{-1/z}
  double n_sqrt_qfi = 0.5;
  double n_chi = 1.0;
  double n_delta_Mx = -0.5;
  double n_delta_mx = 0.0;
};

CrossoverTable crossover_predictions(const ExponentSet& e, Regime regime);

std::string_view to_string(Regime r);
std::string_view to_string(CollapseMode m);

/// Exponent and crossover tables as JSON keyed by j_z, stable key order.
std::string exponent_table_json(const std::vector<double>& j_z_values, int indent = 2);

/// Connected ground-state correlator <sx_a sx_b> - <sx_a><sx_b> for a pair
/// at distance r placed symmetrically about the chain centre.
double connected_correlator(const ChainParams& p, const PureState& gs, int r);

/// Power-law fit of the connected correlator over r in [2, N/4]; the
/// exponent approximates -2[h]. Diagnostic only at accessible sizes.
PowerLawFit correlation_diagnostic(const ChainParams& p);

}  // namespace critmet
