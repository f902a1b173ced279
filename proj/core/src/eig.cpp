#include "critmet/eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "critmet/error.hpp"
#include "lapack.hpp"

namespace critmet {

double EigenResult::gap() const {
  if (values.size() < 2) throw DomainError("gap needs at least two eigenvalues");
  return values[1] - values[0];
}

namespace {

struct LanczosPair {
  double value = 0.0;
  Vector vector;
  double residual = std::numeric_limits<double>::infinity();
  double next_ritz = std::numeric_limits<double>::infinity();
};

Vector random_start(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(normal(rng), normal(rng));
  return v;
}

// Two passes of classical Gram-Schmidt against the basis and the locked set.
void orthogonalize(Vector& w, const std::vector<Vector>& basis,
                   const std::vector<Vector>& locked) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vector& b : locked) w -= b * b.dot(w);
    for (const Vector& b : basis) w -= b * b.dot(w);
  }
}

LanczosPair lanczos_lowest(const SparseHermitian& h, const std::vector<Vector>& locked,
                           double tol, const LanczosOptions& opts, std::mt19937_64& rng) {
  const std::size_t dim = h.dim();
  const std::size_t free_dim = dim - locked.size();
  const int max_basis = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(opts.max_basis), free_dim));

  Vector v = random_start(dim, rng);
  orthogonalize(v, {}, locked);
  v.normalize();

  LanczosPair best;
  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(max_basis));
  Vector w(static_cast<Eigen::Index>(dim));

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    basis.clear();
    basis.push_back(v);
    std::vector<double> alpha, beta;
    Eigen::VectorXd ritz_coeffs;
    double second = std::numeric_limits<double>::infinity();

    for (int j = 0; j < max_basis; ++j) {
      h.apply(basis.back(), w);
      const double a = basis.back().dot(w).real();
      alpha.push_back(a);
      w -= a * basis.back();
      if (j > 0) w -= beta.back() * basis[basis.size() - 2];
      orthogonalize(w, basis, locked);
      const double b = w.norm();

      const bool last = (j + 1 == max_basis) || b < 1e-13;
      if (last || j % 4 == 3) {
        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
        for (Eigen::Index i = 0; i + 1 < m; ++i) sub[i] = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        second = m > 1 ? tri.eigenvalues()[1] : std::numeric_limits<double>::infinity();
        ritz_coeffs = tri.eigenvectors().col(0);
        const double estimate = b * std::abs(ritz_coeffs[m - 1]);
        if (last || estimate < 0.1 * tol) break;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }

    Vector x = Vector::Zero(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < ritz_coeffs.size(); ++i) {
      x += ritz_coeffs[i] * basis[static_cast<std::size_t>(i)];
    }
    orthogonalize(x, {}, locked);
    x.normalize();
    h.apply(x, w);
    const double rayleigh = x.dot(w).real();
    const double residual = (w - rayleigh * x).norm();
    if (residual < best.residual) {
      best.value = rayleigh;
      best.vector = x;
      best.residual = residual;
      best.next_ritz = second;
    }
    if (residual <= tol) return best;
    v = x;
  }
  throw ConvergenceError("Lanczos did not reach residual " + std::to_string(tol) +
                             " (best " + std::to_string(best.residual) + ")",
                         best.residual);
}

void check_tol(double tol) {
  if (!(tol > 0.0)) throw DomainError("eigensolver tolerance must be positive");
}

}  // namespace

EigenResult ground_state(const SparseHermitian& h, double tol, const LanczosOptions& opts) {
  check_tol(tol);
  std::mt19937_64 rng(opts.seed);
  LanczosPair pair = lanczos_lowest(h, {}, tol, opts, rng);

  double next = pair.next_ritz;
  if (opts.degeneracy_probe_tol > 0.0 && h.dim() > 1) {
    // The deflated Ritz value bounds the next level from above, so a value
    // inside the window is conclusive; the looser residual only costs
    // accuracy above it.
    try {
      const LanczosPair probe = lanczos_lowest(
          h, {pair.vector}, std::max(tol, opts.degeneracy_probe_tol), opts, rng);
      next = std::min(next, probe.value);
    } catch (const ConvergenceError&) {
    }
  }

  EigenResult out;
  out.values = Eigen::VectorXd::Constant(1, pair.value);
  out.residuals = Eigen::VectorXd::Constant(1, pair.residual);
  out.near_degenerate = (next - pair.value) < 10.0 * tol;
  out.vectors.push_back(PureState::normalized(std::move(pair.vector)));
  return out;
}

EigenResult low_spectrum(const SparseHermitian& h, int k, double tol,
                         const LanczosOptions& opts) {
  check_tol(tol);
  if (k < 2) throw DomainError("low_spectrum needs k >= 2");
  if (static_cast<std::size_t>(k) > h.dim()) {
    throw DomainError("requested more eigenpairs than the dimension");
  }
  std::mt19937_64 rng(opts.seed);
  std::vector<Vector> locked;
  std::vector<double> values, residuals;
  for (int i = 0; i < k; ++i) {
    LanczosPair pair = lanczos_lowest(h, locked, tol, opts, rng);
    values.push_back(pair.value);
    residuals.push_back(pair.residual);
    locked.push_back(std::move(pair.vector));
  }

  // Locking finds levels in ascending order up to tolerance; sort to be exact.
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  EigenResult out;
  out.values.resize(k);
  out.residuals.resize(k);
  for (int i = 0; i < k; ++i) {
    const std::size_t src = order[static_cast<std::size_t>(i)];
    out.values[i] = values[src];
    out.residuals[i] = residuals[src];
    out.vectors.push_back(PureState::normalized(locked[src]));
  }
  out.near_degenerate = out.gap() < 10.0 * tol;
  return out;
}

DenseSpectrum diagonalize_real(Eigen::MatrixXd h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("matrix is not square");
  if (static_cast<std::size_t>(h.rows()) > dense_cutoff()) {
    throw CapacityError("dimension " + std::to_string(h.rows()) +
                        " exceeds the dense cutoff " + std::to_string(dense_cutoff()));
  }
  const auto n = static_cast<lapack_int>(h.rows());
  DenseSpectrum out;
  out.values.resize(h.rows());
  if (n > 0) {
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, h.data(), n, out.values.data());
    if (info != 0) {
      throw ConvergenceError("dsyevd failed with info " + std::to_string(info),
                             std::numeric_limits<double>::infinity());
    }
  }
  out.vectors = std::move(h);
  return out;
}

DenseSpectrum diagonalize_real(const SparseHermitian& h) {
  if (h.dim() > dense_cutoff()) {
    throw CapacityError("dimension " + std::to_string(h.dim()) +
                        " exceeds the dense cutoff " + std::to_string(dense_cutoff()));
  }
  return diagonalize_real(h.to_dense_real());
}

EigenResult full_diagonalize(const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("matrix is not square");
  if (static_cast<std::size_t>(h.rows()) > dense_cutoff()) {
    throw CapacityError("dimension " + std::to_string(h.rows()) +
                        " exceeds the dense cutoff " + std::to_string(dense_cutoff()));
  }
  const Eigen::Index n = h.rows();
  Eigen::VectorXd values(n);
  Eigen::MatrixXcd vectors;

  if (h.imag().cwiseAbs().maxCoeff() == 0.0 || n == 0) {
    DenseSpectrum real = diagonalize_real(h.real());
    values = real.values;
    vectors = real.vectors.cast<cplx>();
  } else {
    vectors = h;
    const lapack_int info =
        LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', static_cast<lapack_int>(n),
                       vectors.data(), static_cast<lapack_int>(n), values.data());
    if (info != 0) {
      throw ConvergenceError("zheevd failed with info " + std::to_string(info),
                             std::numeric_limits<double>::infinity());
    }
  }

  EigenResult out;
  out.values = values;
  const Eigen::MatrixXcd r = h * vectors - vectors * values.asDiagonal();
  out.residuals = r.colwise().norm().transpose();
  out.vectors.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.vectors.push_back(PureState::normalized(vectors.col(i)));
  out.near_degenerate = n > 1 && (values[1] - values[0]) < 1e-9;
  return out;
}

Eigen::VectorXd singular_values(Eigen::MatrixXd m) {
  const auto rows = static_cast<lapack_int>(m.rows());
  const auto cols = static_cast<lapack_int>(m.cols());
  Eigen::VectorXd s(std::min(m.rows(), m.cols()));
  if (s.size() == 0) return s;
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, m.data(), rows,
                                         s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw ConvergenceError("dgesdd failed with info " + std::to_string(info),
                           std::numeric_limits<double>::infinity());
  }
  return s;
}

Eigen::VectorXd singular_values(Eigen::MatrixXcd m) {
  const auto rows = static_cast<lapack_int>(m.rows());
  const auto cols = static_cast<lapack_int>(m.cols());
  Eigen::VectorXd s(std::min(m.rows(), m.cols()));
  if (s.size() == 0) return s;
  const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, m.data(), rows,
                                         s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw ConvergenceError("zgesdd failed with info " + std::to_string(info),
                           std::numeric_limits<double>::infinity());
  }
  return s;
}

}  // namespace critmet
