#pragma once

#include <cstddef>
#include <map>
#include <string_view>

#include "critmet/eig.hpp"
#include "critmet/finite_difference.hpp"
#include "critmet/model.hpp"

namespace critmet {

enum class SusceptibilityMethod { finite_difference, perturbation_sum };
enum class ObservableTag { Mx, mx, custom };

std::string_view to_string(SusceptibilityMethod m);
std::string_view to_string(ObservableTag t);

struct SusceptibilityResult {
  double chi_f = 0.0;
  double qfi = 0.0;  // always 4 * chi_f
  double delta_used = 0.0;
  SusceptibilityMethod method = SusceptibilityMethod::finite_difference;

  static SusceptibilityResult make(double chi_f, double delta_used, SusceptibilityMethod m);
};

/// Error-propagation precision std(A) / |d<A>/dlambda|.
struct PrecisionResult {
  double delta = 0.0;
  double std_dev = 0.0;
  double susceptibility = 0.0;
  ObservableTag observable_tag = ObservableTag::custom;
  double delta_used = 0.0;

  /// Throws InsensitiveObservable when the susceptibility vanishes.
  static PrecisionResult make(double std_dev, double susceptibility, ObservableTag tag,
                              double delta_used);
};

/// |<a|b>|
double fidelity_pure(const PureState& a, const PureState& b);
/// 1 - |<a|b>| without the cancellation of the naive difference; accurate
/// down to infidelities of order 1e-30.
double infidelity_pure(const PureState& a, const PureState& b);

/// Same as infidelity_pure for normalized raw vectors.
double infidelity(const Vector& a, const Vector& b);

/// (up - down) / h, throwing InsensitiveObservable when the difference is
/// indistinguishable from roundoff or below 1e-12 h.
double expectation_slope(double up, double down, double h);

/// Memoized ground states of H(field) for a fixed chain, so that a
/// susceptibility and several estimators share the same eigensolves.
/// Not thread-safe; use one cache per task.
class GroundStateCache {
 public:
  explicit GroundStateCache(ChainParams base, double tol = kDefaultEigenTol,
                            LanczosOptions opts = {});

  /// Throws DegenerateGroundState when the lowest two levels are within the
  /// solver's degeneracy window.
  const PureState& state(double field);
  double energy(double field);
  const ChainParams& params() const { return base_; }

 private:
  const EigenResult& solve(double field);

  ChainParams base_;
  double tol_;
  LanczosOptions opts_;
  std::map<double, EigenResult> cache_;
};

/// chi_F = 2 (1 - F(lambda - d/2, lambda + d/2)) / d^2 with step control.
/// Throws RegimeError when 1 - F >= 0.1.
SusceptibilityResult chi_finite_difference(const ChainParams& p, const FiniteDifference& fd = {},
                                           GroundStateCache* cache = nullptr);

/// sum_{n>0} |<n|H1|0>|^2 / (E_n - E_0)^2 from the dense spectrum.
SusceptibilityResult chi_perturbation_sum(const ChainParams& p);

/// Ground-state error propagation with a symmetric difference of <A>.
PrecisionResult error_propagation(const ChainParams& p, const SparseHermitian& observable,
                                  ObservableTag tag, const FiniteDifference& fd = {},
                                  GroundStateCache* cache = nullptr);

/// Swap operator exchanging the two N-qubit halves of a 2N-qubit register.
SparseHermitian build_swap_operator(int n_sites);

struct SwapResult {
  PrecisionResult precision;
  double swap_expectation = 0.0;  // <Phi|A_swap|Phi>
  double fidelity = 0.0;          // |<psi(lambda)|psi(lambda + delta)>|
};

/// Two-copy estimator on |psi(lambda)> (x) |psi(lambda + delta)>. The
/// derivative of <A_swap> in delta uses a central difference of width
/// delta/2; the variance is 1 - <A_swap>^2 because A_swap squares to one.
SwapResult swap_estimator(const ChainParams& p, double delta, GroundStateCache* cache = nullptr);

/// Delta(A_swap) * sqrt(G/2) at each delta, and its polynomial extrapolation
/// to delta = 0.
struct SwapLimit {
  std::vector<double> deltas;
  std::vector<double> ratios;
  double extrapolated = 0.0;
  double qfi = 0.0;
};
SwapLimit swap_limit(const ChainParams& p, const std::vector<double>& deltas);

struct HeisenbergReport {
  double inv_sqrt_qfi = 0.0;  // G^{-1/2}
  double bound = 0.0;         // 1 / (t ||H1||)
  double h1_norm = 0.0;       // N
  double time = 0.0;
  bool holds = false;
};

/// Compares G^{-1/2} with 1/(t ||H1||) for the supplied time.
HeisenbergReport heisenberg_bound_check(const ChainParams& p, double t,
                                        const FiniteDifference& fd = {},
                                        GroundStateCache* cache = nullptr);
/// Adiabatic time scale N^{z/d} with z = d = 1.
double adiabatic_time(int n_sites);

/// One row of a static sweep: susceptibility and both magnetization
/// estimators from a shared cache.
struct StaticPoint {
  SusceptibilityResult chi;
  PrecisionResult mx_total;   // M_x
  PrecisionResult mx_center;  // m_x at the center site
};
StaticPoint static_point(const ChainParams& p, const FiniteDifference& fd = {});

}  // namespace critmet
