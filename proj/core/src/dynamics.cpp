#include "critmet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "critmet/eig.hpp"
#include "critmet/error.hpp"

namespace critmet {

void RampProtocol::validate() const {
  if (!(total_time > 0.0) || !std::isfinite(total_time)) {
    throw DomainError("ramp total_time must be positive and finite");
  }
  if (!std::isfinite(delta_lambda)) throw DomainError("ramp delta_lambda must be finite");
  if (steps < 0) throw DomainError("ramp steps must be non-negative");
}

double RampProtocol::shift_at(double t) const { return delta_lambda * (t / total_time); }

double RampProtocol::quench_time() const {
  return delta_lambda == 0.0 ? std::numeric_limits<double>::infinity()
                             : total_time / delta_lambda;
}

void TimeSeries::validate() const {
  if (times.size() != values.size()) throw DomainError("time series lengths differ");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("time series times must strictly increase");
  }
}

std::vector<double> geometric_grid(double t_min, double t_max, int count) {
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) {
    throw DomainError("geometric grid needs 0 < t_min < t_max and at least two points");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  const double ratio = std::log(t_max / t_min) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = t_min * std::exp(ratio * i);
  out.front() = t_min;
  out.back() = t_max;
  return out;
}

namespace {

// One Krylov exponential; empty when the subspace cap is hit first.
std::optional<Vector> krylov_step(const Apply& h, const Vector& v, double dt, double tol,
                                  int max_dim) {
  const double beta0 = v.norm();
  if (beta0 == 0.0) return v;
  std::vector<Vector> basis{v / beta0};
  std::vector<double> alpha, beta;
  Vector w(v.size());
  const int cap = static_cast<int>(std::min<Eigen::Index>(max_dim, v.size()));

  for (int j = 0; j < cap; ++j) {
    h(basis[static_cast<std::size_t>(j)], w);
    const double a = basis.back().dot(w).real();
    alpha.push_back(a);
    w -= a * basis.back();
    if (j > 0) w -= beta.back() * basis[basis.size() - 2];
    for (const Vector& b : basis) w -= b * b.dot(w);
    const double b = w.norm();

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1)
                                : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& s = tri.eigenvectors();
    Eigen::VectorXcd phases(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      phases[k] = std::polar(s(0, k), -tri.eigenvalues()[k] * dt);
    }
    const Eigen::VectorXcd y = s.cast<cplx>() * phases;

    const bool invariant = b <= 1e-14 * std::max(1.0, std::abs(a));
    if (invariant || b * std::abs(y[m - 1]) < tol) {
      Vector out = Vector::Zero(v.size());
      for (Eigen::Index k = 0; k < m; ++k) out += y[k] * basis[static_cast<std::size_t>(k)];
      return out * (beta0 / out.norm());
    }
    if (j + 1 == cap) break;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return std::nullopt;
}

}  // namespace

Vector krylov_evolve(const Apply& h, const Vector& v, double t, const EvolutionOptions& opts) {
  if (!std::isfinite(t)) throw DomainError("evolution time must be finite");
  const double sign = t < 0.0 ? -1.0 : 1.0;
  double remaining = std::abs(t);
  double dt = remaining;
  Vector state = v;
  int failures = 0;
  while (remaining > 0.0) {
    const double step = std::min(dt, remaining);
    if (auto next = krylov_step(h, state, sign * step, opts.krylov_tol, opts.krylov_max_dim)) {
      state = std::move(*next);
      remaining -= step;
      if (remaining < 1e-15 * std::abs(t)) remaining = 0.0;
      dt = step * 1.5;
    } else {
      dt = step * 0.5;
      if (++failures > 200) {
        throw ConvergenceError("Krylov exponential did not converge", opts.krylov_tol);
      }
    }
  }
  return state;
}

Vector krylov_evolve(const SparseHermitian& h, const Vector& v, double t,
                     const EvolutionOptions& opts) {
  if (h.dim() != static_cast<std::size_t>(v.size())) {
    throw DimensionMismatch("operator and state dims differ");
  }
  return krylov_evolve([&](const Vector& in, Vector& out) { h.apply(in, out); }, v, t, opts);
}

PureState evolve_ramp(const PureState& s0, const ChainParams& p, const RampProtocol& r,
                      const EvolutionOptions& opts) {
  r.validate();
  if (s0.dim() != p.dim()) throw DimensionMismatch("initial state and chain dims differ");
  const SparseHermitian h0 = build_hamiltonian(p);
  const SparseHermitian h1 = build_h1(p);

  auto run = [&](int n) {
    Vector v = s0.amplitudes();
    const double dt = r.total_time / n;
    for (int k = 0; k < n; ++k) {
      const double shift = r.shift_at((k + 0.5) * dt);
      const Apply h = [&](const Vector& in, Vector& out) {
        h0.apply(in, out);
        if (shift != 0.0) h1.apply_add(in, shift, out);
      };
      v = krylov_evolve(h, v, dt, opts);
    }
    return v;
  };

  int n = r.steps > 0 ? r.steps
                      : std::max(1, static_cast<int>(std::ceil(r.total_time / opts.max_dt)));
  Vector coarse = run(n);
  double coarse_inf = infidelity(s0.amplitudes(), coarse);
  while (2 * n <= opts.max_steps) {
    n *= 2;
    Vector fine = run(n);
    const double fine_inf = infidelity(s0.amplitudes(), fine);
    const double change = std::abs(fine_inf - coarse_inf);
    if (change < opts.converge_abs && change <= opts.converge_rel * fine_inf + 1e-15) {
      return PureState::normalized(std::move(fine));
    }
    coarse = std::move(fine);
    coarse_inf = fine_inf;
  }
  throw ConvergenceError("ramp propagation not converged at " + std::to_string(n) + " steps",
                         std::numeric_limits<double>::infinity());
}

double qfi_time(const ChainParams& p, const RampProtocol& r, const PureState& gs,
                const FiniteDifference& fd, const EvolutionOptions& opts) {
  r.validate();
  if (!(std::abs(r.delta_lambda) > 0.0)) throw DomainError("qfi_time needs a nonzero shift");
  const SparseHermitian h0 = build_hamiltonian(p);
  const Vector ref = krylov_evolve(h0, gs.amplitudes(), r.total_time, opts);

  FiniteDifference step = fd;
  step.delta = std::abs(r.delta_lambda);
  const double sign = r.delta_lambda < 0.0 ? -1.0 : 1.0;
  auto estimate = [&](double h) {
    RampProtocol shifted = r;
    shifted.delta_lambda = sign * h;
    const double inf = infidelity(ref, evolve_ramp(gs, p, shifted, opts).amplitudes());
    if (inf >= 0.1) {
      throw RegimeError("ramp infidelity " + std::to_string(inf) +
                        " is outside the small-shift regime");
    }
    return 8.0 * inf / (h * h);
  };
  return richardson(estimate, step, 1).value;
}

double qfi_time(const ChainParams& p, const RampProtocol& r, const FiniteDifference& fd,
                const EvolutionOptions& opts) {
  GroundStateCache cache(p);
  return qfi_time(p, r, cache.state(p.field), fd, opts);
}

double speed_limit(double t, double zeta, const ChainParams& p, const PureState& gs) {
  return t * 2.0 * zeta * std::sqrt(variance(build_h1(p), gs));
}

double speed_limit_bound(const ChainParams& p, const RampProtocol& r, const PureState& gs) {
  r.validate();
  return speed_limit(r.total_time, r.zeta(), p, gs);
}

namespace {

bool use_dense(const ChainParams& p, Propagation method) {
  switch (method) {
    case Propagation::dense: return true;
    case Propagation::krylov: return false;
    case Propagation::automatic: return p.dim() <= std::min<std::size_t>(1024, dense_cutoff());
  }
  return false;
}

void check_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw DomainError("time grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw DomainError("time grid must be non-negative and strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> loschmidt_infidelity(const ChainParams& p, const PureState& gs, double delta,
                                         const std::vector<double>& t_grid, Propagation method,
                                         const EvolutionOptions& opts) {
  check_grid(t_grid);
  if (gs.dim() != p.dim()) throw DimensionMismatch("ground state and chain dims differ");
  const SparseHermitian h = build_hamiltonian(p.with_field(p.field + delta));
  std::vector<double> out;
  out.reserve(t_grid.size());

  if (use_dense(p, method)) {
    const DenseSpectrum spec = diagonalize_real(h);
    const Vector coeffs = spec.vectors.transpose().cast<cplx>() * gs.amplitudes();
    // A common energy shift only changes the global phase; centring keeps the
    // phases small so roundoff in E t does not leak into the infidelity.
    const double mean = coeffs.cwiseAbs2().dot(spec.values);
    for (double t : t_grid) {
      Vector evolved(coeffs.size());
      for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
        evolved[k] = coeffs[k] * std::polar(1.0, -(spec.values[k] - mean) * t);
      }
      out.push_back(infidelity(coeffs, evolved));
    }
    return out;
  }

  Vector state = gs.amplitudes();
  double previous = 0.0;
  for (double t : t_grid) {
    state = krylov_evolve(h, state, t - previous, opts);
    previous = t;
    out.push_back(infidelity(gs.amplitudes(), state));
  }
  return out;
}

TimeSeries loschmidt_echo(const ChainParams& p, double delta, const std::vector<double>& t_grid,
                          Propagation method) {
  GroundStateCache cache(p);
  const std::vector<double> inf =
      loschmidt_infidelity(p, cache.state(p.field), delta, t_grid, method);
  TimeSeries out{t_grid, {}, "loschmidt_echo", p.n_sites};
  for (double x : inf) out.values.push_back(1.0 - x);
  return out;
}

TimeSeries qfi_loschmidt(const ChainParams& p, const std::vector<double>& t_grid,
                         const FiniteDifference& fd, const PureState* gs, Propagation method) {
  check_grid(t_grid);
  std::optional<GroundStateCache> cache;
  if (!gs) {
    cache.emplace(p);
    gs = &cache->state(p.field);
  }
  auto series = [&](double h) {
    std::vector<double> inf = loschmidt_infidelity(p, *gs, h, t_grid, method);
    for (double& x : inf) {
      if (x >= 0.1) throw RegimeError("Loschmidt infidelity outside the small-shift regime");
      x *= 8.0 / (h * h);
    }
    return inf;
  };

  const std::size_t n = t_grid.size();
  TimeSeries out{t_grid, std::vector<double>(n), "qfi_loschmidt", p.n_sites};
  double h = fd.delta;
  std::vector<double> coarse = series(h);
  if (!fd.adaptive) {
    out.values = coarse;
    for (std::size_t i = 0; i < n; ++i) {
      if (t_grid[i] == 0.0) out.values[i] = 0.0;
    }
    return out;
  }
  // No evolution means no information; roundoff there never settles.
  std::vector<bool> done(n, false);
  for (std::size_t i = 0; i < n; ++i) done[i] = t_grid[i] == 0.0;
  for (int k = 1; k <= fd.max_halvings; ++k) {
    h *= 0.5;
    const std::vector<double> fine = series(h);
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      if (std::abs(fine[i] - coarse[i]) <= fd.rel_tol * std::abs(fine[i])) {
        out.values[i] = 2.0 * fine[i] - coarse[i];
        done[i] = true;
      } else {
        all = false;
      }
    }
    if (all) return out;
    coarse = fine;
  }
  throw RegimeError("Loschmidt QFI did not settle under step halving");
}

TimeSeries precision_time(const ChainParams& p, Quench kind, const SparseHermitian& observable,
                          const std::vector<double>& t_grid, const FiniteDifference& fd,
                          const PureState* gs, const EvolutionOptions& opts) {
  check_grid(t_grid);
  if (observable.dim() != p.dim()) throw DimensionMismatch("observable and chain dims differ");
  std::optional<GroundStateCache> cache;
  if (!gs) {
    cache.emplace(p);
    gs = &cache->state(p.field);
  }
  const SparseHermitian h0 = build_hamiltonian(p);
  const SparseHermitian h1 = build_h1(p);

  auto evolved = [&](double shift, double t) -> Vector {
    if (t == 0.0) return gs->amplitudes();
    if (kind == Quench::ramp) {
      return evolve_ramp(*gs, p, RampProtocol{shift, t}, opts).amplitudes();
    }
    const Apply h = [&](const Vector& in, Vector& out) {
      h0.apply(in, out);
      h1.apply_add(in, shift, out);
    };
    return krylov_evolve(h, gs->amplitudes(), t, opts);
  };

  TimeSeries out{t_grid, {}, kind == Quench::ramp ? "precision_ramp" : "precision_sudden",
                 p.n_sites};
  for (double t : t_grid) {
    const Vector ref = t == 0.0 ? gs->amplitudes() : krylov_evolve(h0, gs->amplitudes(), t, opts);
    const double std_dev = std::sqrt(variance(observable, PureState::normalized(ref)));
    auto estimate = [&](double h) {
      const double up = observable.expectation(evolved(0.5 * h, t));
      const double down = observable.expectation(evolved(-0.5 * h, t));
      return expectation_slope(up, down, h);
    };
    const FdEstimate slope = richardson(estimate, fd, 2);
    out.values.push_back(PrecisionResult::make(std_dev, slope.value, ObservableTag::custom,
                                               slope.delta_used)
                             .delta);
  }
  return out;
}

}  // namespace critmet
