#include "critmet/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "critmet/error.hpp"

namespace critmet {

std::string_view to_string(SusceptibilityMethod m) {
  switch (m) {
    case SusceptibilityMethod::finite_difference: return "finite_difference";
    case SusceptibilityMethod::perturbation_sum: return "perturbation_sum";
  }
  return "unknown";
}

std::string_view to_string(ObservableTag t) {
  switch (t) {
    case ObservableTag::Mx: return "Mx";
    case ObservableTag::mx: return "mx";
    case ObservableTag::custom: return "custom";
  }
  return "unknown";
}

SusceptibilityResult SusceptibilityResult::make(double chi_f, double delta_used,
                                                SusceptibilityMethod m) {
  // Roundoff can leave an exactly-zero susceptibility marginally negative.
  chi_f = std::max(chi_f, 0.0);
  return {chi_f, 4.0 * chi_f, delta_used, m};
}

PrecisionResult PrecisionResult::make(double std_dev, double susceptibility, ObservableTag tag,
                                      double delta_used) {
  if (!(std::abs(susceptibility) >= 1e-12)) {
    throw InsensitiveObservable("observable susceptibility " + std::to_string(susceptibility) +
                                " is below 1e-12");
  }
  return {std_dev / std::abs(susceptibility), std_dev, susceptibility, tag, delta_used};
}

double fidelity_pure(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("fidelity of states with different dims");
  return std::min(1.0, std::abs(a.amplitudes().dot(b.amplitudes())));
}

double infidelity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("fidelity of states with different dims");
  const cplx overlap = a.dot(b);
  const double f = std::min(1.0, std::abs(overlap));
  // 1 - F = (1 - F^2) / (1 + F), with 1 - F^2 the weight of b orthogonal to
  // a. Averaging both projections makes the result bitwise symmetric.
  const double perp =
      0.5 * ((b - overlap * a).squaredNorm() + (a - std::conj(overlap) * b).squaredNorm());
  return perp / (1.0 + f);
}

double infidelity_pure(const PureState& a, const PureState& b) {
  return infidelity(a.amplitudes(), b.amplitudes());
}

double expectation_slope(double up, double down, double h) {
  const double diff = up - down;
  const double scale = std::max({std::abs(up), std::abs(down), 1.0});
  if (std::abs(diff) <= 1e-12 * h ||
      std::abs(diff) <= 1e3 * std::numeric_limits<double>::epsilon() * scale) {
    throw InsensitiveObservable("expectation value does not respond to the field shift");
  }
  return diff / h;
}

GroundStateCache::GroundStateCache(ChainParams base, double tol, LanczosOptions opts)
    : base_(base), tol_(tol), opts_(opts) {
  base_.validate();
}

const EigenResult& GroundStateCache::solve(double field) {
  auto it = cache_.find(field);
  if (it == cache_.end()) {
    EigenResult r = ground_state(build_hamiltonian(base_.with_field(field)), tol_, opts_);
    it = cache_.emplace(field, std::move(r)).first;
  }
  if (it->second.near_degenerate) {
    throw DegenerateGroundState("ground state at field " + std::to_string(field) +
                                " is degenerate within the solver tolerance");
  }
  return it->second;
}

const PureState& GroundStateCache::state(double field) { return solve(field).vectors.front(); }

double GroundStateCache::energy(double field) { return solve(field).values[0]; }

SusceptibilityResult chi_finite_difference(const ChainParams& p, const FiniteDifference& fd,
                                           GroundStateCache* cache) {
  GroundStateCache local(p);
  GroundStateCache& c = cache ? *cache : local;
  const double lambda = p.field;
  auto estimate = [&](double h) {
    const double inf = infidelity_pure(c.state(lambda - 0.5 * h), c.state(lambda + 0.5 * h));
    if (inf >= 0.1) {
      throw RegimeError("infidelity " + std::to_string(inf) + " at step " + std::to_string(h) +
                        " is outside the small-shift regime");
    }
    return 2.0 * inf / (h * h);
  };
  FdEstimate e;
  try {
    e = richardson(estimate, fd, 2);
  } catch (const RegimeError&) {
    // A split degenerate level looks like a huge step; name the real cause.
    c.state(lambda);
    throw;
  }
  return SusceptibilityResult::make(e.value, e.delta_used, SusceptibilityMethod::finite_difference);
}

SusceptibilityResult chi_perturbation_sum(const ChainParams& p) {
  p.validate();
  const DenseSpectrum spec = diagonalize_real(build_hamiltonian(p));
  const Eigen::Index n = spec.values.size();
  if (n < 2 || spec.values[1] - spec.values[0] < 1e-8) {
    throw DegenerateGroundState("ground state is degenerate; perturbation sum undefined");
  }
  const SparseHermitian h1 = build_h1(p);
  const Vector ground = spec.vectors.col(0).cast<cplx>();
  const Eigen::VectorXd coupled = h1.apply(ground).real();
  const Eigen::VectorXd elements = spec.vectors.transpose() * coupled;
  double chi = 0.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    const double gap = spec.values[k] - spec.values[0];
    chi += elements[k] * elements[k] / (gap * gap);
  }
  return SusceptibilityResult::make(chi, 0.0, SusceptibilityMethod::perturbation_sum);
}

PrecisionResult error_propagation(const ChainParams& p, const SparseHermitian& observable,
                                  ObservableTag tag, const FiniteDifference& fd,
                                  GroundStateCache* cache) {
  if (observable.dim() != p.dim()) throw DimensionMismatch("observable and chain dims differ");
  GroundStateCache local(p);
  GroundStateCache& c = cache ? *cache : local;
  const double lambda = p.field;
  const double std_dev = std::sqrt(variance(observable, c.state(lambda)));
  auto estimate = [&](double h) {
    const double up = observable.expectation(c.state(lambda + 0.5 * h).amplitudes());
    const double down = observable.expectation(c.state(lambda - 0.5 * h).amplitudes());
    return expectation_slope(up, down, h);
  };
  const FdEstimate e = richardson(estimate, fd, 2);
  return PrecisionResult::make(std_dev, e.value, tag, e.delta_used);
}

SparseHermitian build_swap_operator(int n_sites) {
  if (n_sites < 1) throw DomainError("swap operator needs at least one qubit per register");
  const std::size_t half = std::size_t{1} << n_sites;
  const std::size_t dim = half * half;
  if (dim > max_sparse_dim()) throw CapacityError("doubled register exceeds the sparse budget");
  std::vector<Triplet> upper;
  upper.reserve(dim);
  for (std::size_t i = 0; i < half; ++i) {
    for (std::size_t j = i; j < half; ++j) {
      upper.push_back({i * half + j, j * half + i, 1.0});
    }
  }
  return SparseHermitian::from_upper(dim, std::move(upper));
}

namespace {

Vector tensor(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

}  // namespace

SwapResult swap_estimator(const ChainParams& p, double delta, GroundStateCache* cache) {
  if (!(delta > 0.0)) throw DomainError("swap estimator step must be positive");
  p.validate();
  const std::size_t dim = p.dim();
  if (dim * dim > dense_cutoff()) {
    throw CapacityError("doubled register of dim " + std::to_string(dim * dim) +
                        " exceeds the dense cutoff " + std::to_string(dense_cutoff()));
  }
  GroundStateCache local(p, 1e-12);
  GroundStateCache& c = cache ? *cache : local;
  const SparseHermitian swap = build_swap_operator(p.n_sites);
  const double lambda = p.field;
  const Vector& a = c.state(lambda).amplitudes();

  auto doubled = [&](double shift) {
    return PureState::normalized(tensor(a, c.state(lambda + shift).amplitudes()));
  };
  const PureState phi = doubled(delta);
  const double h = 0.25 * delta;
  const double up = swap.expectation(doubled(delta + h).amplitudes());
  const double down = swap.expectation(doubled(delta - h).amplitudes());

  SwapResult out;
  out.swap_expectation = swap.expectation(phi.amplitudes());
  out.fidelity = fidelity_pure(c.state(lambda), c.state(lambda + delta));
  out.precision = PrecisionResult::make(std::sqrt(variance(swap, phi)), (up - down) / (2.0 * h),
                                        ObservableTag::custom, delta);
  return out;
}

SwapLimit swap_limit(const ChainParams& p, const std::vector<double>& deltas) {
  if (deltas.size() < 2) throw DomainError("swap extrapolation needs at least two steps");
  GroundStateCache cache(p, 1e-12);
  SwapLimit out;
  out.qfi = chi_finite_difference(p, {}, &cache).qfi;
  const double scale = std::sqrt(out.qfi / 2.0);
  for (double d : deltas) {
    out.deltas.push_back(d);
    out.ratios.push_back(swap_estimator(p, d, &cache).precision.delta * scale);
  }
  out.extrapolated = extrapolate_to_zero(out.deltas, out.ratios);
  return out;
}

HeisenbergReport heisenberg_bound_check(const ChainParams& p, double t,
                                        const FiniteDifference& fd, GroundStateCache* cache) {
  if (!(t > 0.0)) throw DomainError("Heisenberg check needs t > 0");
  HeisenbergReport r;
  r.time = t;
  r.h1_norm = static_cast<double>(p.n_sites);
  r.inv_sqrt_qfi = 1.0 / std::sqrt(chi_finite_difference(p, fd, cache).qfi);
  r.bound = 1.0 / (t * r.h1_norm);
  r.holds = r.inv_sqrt_qfi >= r.bound;
  return r;
}

double adiabatic_time(int n_sites) { return static_cast<double>(n_sites); }

StaticPoint static_point(const ChainParams& p, const FiniteDifference& fd) {
  GroundStateCache cache(p);
  StaticPoint out;
  out.chi = chi_finite_difference(p, fd, &cache);
  out.mx_total = error_propagation(p, build_h1(p), ObservableTag::Mx, fd, &cache);
  out.mx_center =
      error_propagation(p, build_local_h(p, center_site(p.n_sites)), ObservableTag::mx, fd, &cache);
  return out;
}

}  // namespace critmet
