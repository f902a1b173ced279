#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "critmet/model.hpp"

namespace critmet {

struct EigenResult {
  Eigen::VectorXd values;           // ascending
  std::vector<PureState> vectors;   // may hold fewer entries than values
  Eigen::VectorXd residuals;        // ||H v - E v|| per returned vector
  bool near_degenerate = false;     // lowest two levels closer than 10 tol

  /// values[1] - values[0]; throws DomainError with fewer than two values.
  double gap() const;
};

struct LanczosOptions {
  int max_basis = 100;  // Krylov vectors kept before an explicit restart
  int max_restarts = 400;
  std::uint64_t seed = 20190601;
  /// A single Krylov space sees a degenerate level once, so ground_state
  /// confirms the gap with a second, deflated run to this looser residual.
  /// Zero skips the check.
  double degeneracy_probe_tol = 1e-6;
};

/// Default eigenpair tolerance for states feeding fidelity derivatives.
inline constexpr double kDefaultEigenTol = 1e-10;

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
/// Deterministic for a fixed seed. Throws ConvergenceError carrying the best
/// residual when the tolerance is not reached. near_degenerate is set when
/// the next level, found by a deflated probe, lies within 10 tol.
EigenResult ground_state(const SparseHermitian& h, double tol = kDefaultEigenTol,
                         const LanczosOptions& opts = {});

/// The k lowest eigenpairs. Each pair is found by Lanczos on the orthogonal
/// complement of the pairs already locked, so degenerate levels are resolved.
EigenResult low_spectrum(const SparseHermitian& h, int k, double tol = kDefaultEigenTol,
                         const LanczosOptions& opts = {});

/// Complete eigendecomposition of a dense Hermitian matrix. Throws
/// CapacityError above dense_cutoff().
EigenResult full_diagonalize(const Eigen::MatrixXcd& h);

/// Real symmetric spectrum kept as a dense orthogonal matrix; the storage
/// behind thermal states and the perturbation-sum oracle.
struct DenseSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns are eigenvectors
};

DenseSpectrum diagonalize_real(Eigen::MatrixXd h);
/// Dense spectrum of a real sparse operator (converted densely).
DenseSpectrum diagonalize_real(const SparseHermitian& h);

/// Singular values of a real matrix, descending.
Eigen::VectorXd singular_values(Eigen::MatrixXd m);
Eigen::VectorXd singular_values(Eigen::MatrixXcd m);

}  // namespace critmet
