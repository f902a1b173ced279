#include "critmet/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "critmet/error.hpp"

namespace critmet {

namespace {

constexpr double kWeightFloor = 1e-32;

std::vector<Eigen::Index> all_indices(Eigen::Index n) {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

std::vector<Eigen::Index> significant(const Eigen::VectorXd& w) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > kWeightFloor) out.push_back(i);
  }
  return out;
}

}  // namespace

void MixedState::check() const {
  const auto rows = std::visit([](const auto& b) { return b->rows(); }, basis_);
  const auto cols = std::visit([](const auto& b) { return b->cols(); }, basis_);
  if (cols != weights_.size()) throw DimensionMismatch("weights and basis sizes differ");
  if (rows < cols) throw DimensionMismatch("basis has more columns than rows");
  if (weights_.size() > 0 && weights_.minCoeff() < 0.0) {
    throw DomainError("mixed-state weights must be non-negative");
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-10) {
    throw DomainError("mixed-state trace " + std::to_string(weights_.sum()) + " is not one");
  }
  if (temperature_ && !(*temperature_ > 0.0)) throw DomainError("temperature must be positive");
}

MixedState MixedState::from_matrix(const Eigen::MatrixXcd& rho,
                                   std::optional<double> temperature) {
  if (rho.rows() != rho.cols()) throw DimensionMismatch("density matrix is not square");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("density matrix is not Hermitian");
  }
  const EigenResult eig = full_diagonalize(rho);
  const Eigen::Index n = rho.rows();
  auto basis = std::make_shared<Eigen::MatrixXcd>(n, n);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = eig.values[i];
    if (v < -1e-12) {
      throw DomainError("density matrix has eigenvalue " + std::to_string(v) + " below -1e-12");
    }
    w[i] = std::max(v, 0.0);
    basis->col(i) = eig.vectors[static_cast<std::size_t>(i)].amplitudes();
  }
  MixedState out;
  out.weights_ = std::move(w);
  out.basis_ = ComplexBasis(std::move(basis));
  out.temperature_ = temperature;
  out.check();
  return out;
}

MixedState MixedState::from_spectrum(Eigen::VectorXd weights, RealBasis basis,
                                     std::optional<double> temperature) {
  if (!basis) throw DomainError("null basis");
  MixedState out;
  out.weights_ = std::move(weights);
  out.basis_ = std::move(basis);
  out.temperature_ = temperature;
  out.check();
  return out;
}

MixedState MixedState::from_spectrum(Eigen::VectorXd weights, ComplexBasis basis,
                                     std::optional<double> temperature) {
  if (!basis) throw DomainError("null basis");
  MixedState out;
  out.weights_ = std::move(weights);
  out.basis_ = std::move(basis);
  out.temperature_ = temperature;
  out.check();
  return out;
}

MixedState MixedState::pure(const PureState& s) {
  auto basis = std::make_shared<Eigen::MatrixXcd>(s.amplitudes());
  return from_spectrum(Eigen::VectorXd::Ones(1), ComplexBasis(std::move(basis)));
}

std::size_t MixedState::dim() const {
  return static_cast<std::size_t>(std::visit([](const auto& b) { return b->rows(); }, basis_));
}

bool MixedState::complete() const {
  return std::visit([](const auto& b) { return b->rows() == b->cols(); }, basis_);
}

Eigen::MatrixXcd MixedState::matrix() const {
  return std::visit(
      [&](const auto& b) -> Eigen::MatrixXcd {
        const Eigen::MatrixXcd v = b->template cast<cplx>();
        return v * weights_.asDiagonal() * v.adjoint();
      },
      basis_);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> MixedState::diagonal_moments(
    const SparseHermitian& a) const {
  if (a.dim() != dim()) throw DimensionMismatch("observable and state dims differ");
  const Eigen::Index n = weights_.size();
  Eigen::VectorXd first(n), second(n);
  Vector col, image(static_cast<Eigen::Index>(dim()));
  for (Eigen::Index i = 0; i < n; ++i) {
    col = std::visit([&](const auto& b) -> Vector { return b->col(i).template cast<cplx>(); },
                     basis_);
    a.apply(col, image);
    first[i] = col.dot(image).real();
    second[i] = image.squaredNorm();
  }
  return {first, second};
}

double MixedState::expectation(const SparseHermitian& a) const {
  return weights_.dot(diagonal_moments(a).first);
}

double MixedState::variance(const SparseHermitian& a) const {
  const auto [first, second] = diagonal_moments(a);
  const double mean = weights_.dot(first);
  return std::max(0.0, weights_.dot(second) - mean * mean);
}

Eigen::MatrixXcd MixedState::overlap(const MixedState& other,
                                     const std::vector<Eigen::Index>& rows,
                                     const std::vector<Eigen::Index>& cols) const {
  if (dim() != other.dim()) throw DimensionMismatch("mixed states have different dims");
  const auto r = rows.empty() ? all_indices(weights_.size()) : rows;
  const auto c = cols.empty() ? all_indices(other.weights_.size()) : cols;
  const Eigen::MatrixXcd left = std::visit(
      [&](const auto& b) -> Eigen::MatrixXcd { return (*b)(Eigen::all, r).template cast<cplx>(); },
      basis_);
  const Eigen::MatrixXcd right = std::visit(
      [&](const auto& b) -> Eigen::MatrixXcd { return (*b)(Eigen::all, c).template cast<cplx>(); },
      other.basis_);
  return left.adjoint() * right;
}

Eigen::MatrixXd MixedState::overlap_real(const MixedState& other,
                                         const std::vector<Eigen::Index>& rows,
                                         const std::vector<Eigen::Index>& cols) const {
  if (!is_real() || !other.is_real()) throw DomainError("real overlap needs real bases");
  if (dim() != other.dim()) throw DimensionMismatch("mixed states have different dims");
  const auto r = rows.empty() ? all_indices(weights_.size()) : rows;
  const auto c = cols.empty() ? all_indices(other.weights_.size()) : cols;
  const auto& left = *std::get<RealBasis>(basis_);
  const auto& right = *std::get<RealBasis>(other.basis_);
  return left(Eigen::all, r).transpose() * right(Eigen::all, c);
}

Eigen::VectorXd gibbs_weights(const Eigen::VectorXd& energies, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError("temperature must be positive and finite");
  }
  if (energies.size() == 0) throw DomainError("empty spectrum");
  const double ground = energies.minCoeff();
  Eigen::VectorXd w = (-(energies.array() - ground) / temperature).exp().matrix();
  return w / w.sum();
}

ThermalFamily::ThermalFamily(ChainParams base) : base_(base) { base_.validate(); }

std::shared_ptr<const DenseSpectrum> ThermalFamily::spectrum(double field) {
  auto it = spectra_.find(field);
  if (it == spectra_.end()) {
    auto spec = std::make_shared<const DenseSpectrum>(
        diagonalize_real(build_hamiltonian(base_.with_field(field))));
    it = spectra_.emplace(field, std::move(spec)).first;
  }
  return it->second;
}

MixedState ThermalFamily::gibbs(double field, double temperature) {
  auto spec = spectrum(field);
  Eigen::VectorXd w = gibbs_weights(spec->values, temperature);
  MixedState::RealBasis basis(spec, &spec->vectors);
  return MixedState::from_spectrum(std::move(w), std::move(basis), temperature);
}

MixedState gibbs_state(const ChainParams& p, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  ThermalFamily family(p);
  return family.gibbs(p.field, temperature);
}

double uhlmann_fidelity(const MixedState& a, const MixedState& b) {
  const auto rows = significant(a.weights());
  const auto cols = significant(b.weights());
  const Eigen::VectorXd sa = a.weights()(rows).cwiseSqrt();
  const Eigen::VectorXd sb = b.weights()(cols).cwiseSqrt();
  double f = 0.0;
  if (a.is_real() && b.is_real()) {
    const Eigen::MatrixXd m = sa.asDiagonal() * a.overlap_real(b, rows, cols) * sb.asDiagonal();
    f = singular_values(m).sum();
  } else {
    const Eigen::MatrixXcd m = sa.cast<cplx>().asDiagonal() * a.overlap(b, rows, cols) *
                               sb.cast<cplx>().asDiagonal();
    f = singular_values(m).sum();
  }
  return std::clamp(f, 0.0, 1.0);
}

double uhlmann_infidelity(const MixedState& a, const MixedState& b) {
  return 1.0 - uhlmann_fidelity(a, b);
}

namespace {

// 1 - Tr[sqrt(rho) sqrt(sigma)]. With complete bases this equals
// 1/2 sum_ij |O_ij|^2 (sqrt p_i - sqrt q_j)^2, a sum of non-negative terms
// that stays accurate when the states are close.
double tilde_gap(const MixedState& a, const MixedState& b) {
  const Eigen::VectorXd sa = a.weights().cwiseSqrt();
  const Eigen::VectorXd sb = b.weights().cwiseSqrt();
  const Eigen::MatrixXd o2 = (a.is_real() && b.is_real())
                                 ? Eigen::MatrixXd(a.overlap_real(b).cwiseAbs2())
                                 : Eigen::MatrixXd(a.overlap(b).cwiseAbs2());
  if (a.complete() && b.complete()) {
    double x = 0.0;
    for (Eigen::Index j = 0; j < o2.cols(); ++j) {
      x += (o2.col(j).array() * (sa.array() - sb[j]).square()).sum();
    }
    return 0.5 * x;
  }
  return std::max(0.0, 0.5 * (a.trace() + b.trace()) - sa.dot(o2 * sb));
}

}  // namespace

double tilde_fidelity(const MixedState& a, const MixedState& b) {
  return std::sqrt(std::max(0.0, 1.0 - tilde_gap(a, b)));
}

double tilde_infidelity(const MixedState& a, const MixedState& b) {
  const double x = std::min(tilde_gap(a, b), 1.0);
  return x / (1.0 + std::sqrt(1.0 - x));
}

ThermalQfi thermal_qfi_bounds(const ChainParams& p, double temperature,
                              const FiniteDifference& fd, ThermalFamily* family) {
  std::optional<ThermalFamily> local;
  if (!family) family = &local.emplace(p);
  const double lambda = p.field;
  auto pair = [&](double h) {
    return std::pair{family->gibbs(lambda - 0.5 * h, temperature),
                     family->gibbs(lambda + 0.5 * h, temperature)};
  };
  auto regime = [](double inf, double h) {
    if (inf >= 0.1) {
      throw RegimeError("thermal infidelity " + std::to_string(inf) + " at step " +
                        std::to_string(h) + " is outside the small-shift regime");
    }
  };
  const FdEstimate chi = richardson(
      [&](double h) {
        const auto [a, b] = pair(h);
        const double inf = uhlmann_infidelity(a, b);
        regime(inf, h);
        return 2.0 * inf / (h * h);
      },
      fd, 2);
  const FdEstimate chi_tilde = richardson(
      [&](double h) {
        const auto [a, b] = pair(h);
        const double inf = tilde_infidelity(a, b);
        regime(inf, h);
        return 2.0 * inf / (h * h);
      },
      fd, 2);

  ThermalQfi out;
  out.chi = std::max(chi.value, 0.0);
  out.chi_tilde = std::max(chi_tilde.value, 0.0);
  out.exact_qfi = 4.0 * out.chi;
  out.g_tilde = 8.0 * out.chi_tilde;
  out.delta_used = std::min(chi.delta_used, chi_tilde.delta_used);
  constexpr double tol = 1e-6;
  out.sandwich_holds =
      out.chi >= out.chi_tilde * (1.0 - tol) && out.chi <= 2.0 * out.chi_tilde * (1.0 + tol);
  return out;
}

std::vector<PrecisionResult> thermal_precision(const ChainParams& p,
                                               const std::vector<double>& temperatures,
                                               const SparseHermitian& observable,
                                               ObservableTag tag, const FiniteDifference& fd,
                                               ThermalFamily* family) {
  if (observable.dim() != p.dim()) throw DimensionMismatch("observable and chain dims differ");
  std::optional<ThermalFamily> local;
  if (!family) family = &local.emplace(p);

  struct Moments {
    std::shared_ptr<const DenseSpectrum> spec;
    Eigen::VectorXd first, second;
  };
  std::map<double, Moments> cache;
  auto moments = [&](double field) -> const Moments& {
    auto it = cache.find(field);
    if (it == cache.end()) {
      Moments m;
      m.spec = family->spectrum(field);
      const MixedState basis = MixedState::from_spectrum(
          Eigen::VectorXd::Unit(m.spec->values.size(), 0),
          MixedState::RealBasis(m.spec, &m.spec->vectors));
      std::tie(m.first, m.second) = basis.diagonal_moments(observable);
      it = cache.emplace(field, std::move(m)).first;
    }
    return it->second;
  };

  const double lambda = p.field;
  std::vector<PrecisionResult> out;
  for (double t : temperatures) {
    const Moments& centre = moments(lambda);
    const Eigen::VectorXd w = gibbs_weights(centre.spec->values, t);
    const double mean = w.dot(centre.first);
    const double var = std::max(0.0, w.dot(centre.second) - mean * mean);
    auto expect = [&](double field) {
      const Moments& m = moments(field);
      return gibbs_weights(m.spec->values, t).dot(m.first);
    };
    const FdEstimate slope = richardson(
        [&](double h) { return expectation_slope(expect(lambda + 0.5 * h), expect(lambda - 0.5 * h), h); },
        fd, 2);
    out.push_back(PrecisionResult::make(std::sqrt(var), slope.value, tag, slope.delta_used));
  }
  return out;
}

PrecisionResult thermal_precision(const ChainParams& p, double temperature,
                                  const SparseHermitian& observable, ObservableTag tag,
                                  const FiniteDifference& fd, ThermalFamily* family) {
  return thermal_precision(p, std::vector<double>{temperature}, observable, tag, fd, family)
      .front();
}

}  // namespace critmet
