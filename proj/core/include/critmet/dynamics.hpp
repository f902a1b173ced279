#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "critmet/finite_difference.hpp"
#include "critmet/metrology.hpp"
#include "critmet/model.hpp"

namespace critmet {

enum class RampProfile { linear };

/// Linear ramp lambda -> lambda + delta_lambda * t'/total_time.
struct RampProtocol {
  double delta_lambda = 0.0;
  double total_time = 1.0;
  RampProfile profile = RampProfile::linear;
  int steps = 0;  // initial step count for the doubling test; 0 picks one from max_dt

  void validate() const;
  /// Field shift at time t' in [0, total_time].
  double shift_at(double t) const;
  /// total_time / delta_lambda (infinite for a zero shift).
  double quench_time() const;
  /// Time average of the profile over the ramp, normalized by delta_lambda.
  double zeta() const { return 0.5; }
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::string label;
  std::optional<int> n_sites;

  /// Throws DomainError unless lengths match and times strictly increase.
  void validate() const;
  std::size_t size() const { return times.size(); }
};

/// `count` geometrically spaced times from t_min to t_max inclusive.
std::vector<double> geometric_grid(double t_min, double t_max, int count);

struct EvolutionOptions {
  double krylov_tol = 1e-12;  // per Krylov exponential
  int krylov_max_dim = 40;
  double max_dt = 0.1;        // starting ramp step before doubling
  double converge_abs = 1e-8; // step-doubling test on 1 - |<s0|psi>|
  double converge_rel = 1e-4;
  int max_steps = 1 << 18;
};

using Apply = std::function<void(const Vector&, Vector&)>;

/// exp(-i H t) v with H given by its action. Sub-steps adaptively so each
/// Krylov exponential meets opts.krylov_tol.
Vector krylov_evolve(const Apply& h, const Vector& v, double t, const EvolutionOptions& opts = {});
Vector krylov_evolve(const SparseHermitian& h, const Vector& v, double t,
                     const EvolutionOptions& opts = {});

/// Midpoint-field propagation through the ramp, doubling the step count
/// until the overlap with s0 is converged. Throws ConvergenceError past
/// opts.max_steps.
PureState evolve_ramp(const PureState& s0, const ChainParams& p, const RampProtocol& r,
                      const EvolutionOptions& opts = {});

/// G(lambda, t) = 8 (1 - F) / delta^2 between the ramped state and the
/// unperturbed evolution of the ground state `gs` of H(p.field). The step is
/// r.delta_lambda; fd supplies the halving policy.
double qfi_time(const ChainParams& p, const RampProtocol& r, const PureState& gs,
                const FiniteDifference& fd = {}, const EvolutionOptions& opts = {});
double qfi_time(const ChainParams& p, const RampProtocol& r, const FiniteDifference& fd = {},
                const EvolutionOptions& opts = {});

/// t 2 zeta std(H1), the variance taken in gs.
double speed_limit(double t, double zeta, const ChainParams& p, const PureState& gs);
double speed_limit_bound(const ChainParams& p, const RampProtocol& r, const PureState& gs);

enum class Propagation { automatic, dense, krylov };

/// 1 - F_LE(t) on the grid, accurate for tiny infidelities.
std::vector<double> loschmidt_infidelity(const ChainParams& p, const PureState& gs, double delta,
                                         const std::vector<double>& t_grid,
                                         Propagation method = Propagation::automatic,
                                         const EvolutionOptions& opts = {});

/// F_LE(t) = |<psi0| exp(-i H(lambda + delta) t) |psi0>|.
TimeSeries loschmidt_echo(const ChainParams& p, double delta, const std::vector<double>& t_grid,
                          Propagation method = Propagation::automatic);

/// G_LE(t) = 8 (1 - F_LE) / delta^2, with step halving per grid point.
TimeSeries qfi_loschmidt(const ChainParams& p, const std::vector<double>& t_grid,
                         const FiniteDifference& fd = {}, const PureState* gs = nullptr,
                         Propagation method = Propagation::automatic);

enum class Quench { ramp, sudden };

/// Error propagation of A after a ramp of duration t (or a sudden quench
/// held for t), for each t in the grid.
TimeSeries precision_time(const ChainParams& p, Quench kind, const SparseHermitian& observable,
                          const std::vector<double>& t_grid, const FiniteDifference& fd = {},
                          const PureState* gs = nullptr, const EvolutionOptions& opts = {});

}  // namespace critmet
