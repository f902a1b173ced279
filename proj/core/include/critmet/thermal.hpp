#pragma once

#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "critmet/eig.hpp"
#include "critmet/finite_difference.hpp"
#include "critmet/metrology.hpp"
#include "critmet/model.hpp"

namespace critmet {

/// Density matrix held in spectral form: rho = sum_i w_i |v_i><v_i|. The
/// basis is shared between copies, so Gibbs states at several temperatures
/// cost one diagonalization.
class MixedState {
 public:
  using RealBasis = std::shared_ptr<const Eigen::MatrixXd>;
  using ComplexBasis = std::shared_ptr<const Eigen::MatrixXcd>;

  /// Diagonalizes rho. Eigenvalues in [-1e-12, 0) are clamped to zero;
  /// anything more negative, a non-Hermitian input or a trace off by more
  /// than 1e-10 is rejected with DomainError.
  static MixedState from_matrix(const Eigen::MatrixXcd& rho,
                                std::optional<double> temperature = std::nullopt);
  /// Weights must be non-negative and sum to one; columns orthonormal.
  static MixedState from_spectrum(Eigen::VectorXd weights, RealBasis basis,
                                  std::optional<double> temperature = std::nullopt);
  static MixedState from_spectrum(Eigen::VectorXd weights, ComplexBasis basis,
                                  std::optional<double> temperature = std::nullopt);
  static MixedState pure(const PureState& s);

  std::size_t dim() const;
  std::optional<double> temperature() const { return temperature_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  /// True when the basis spans the whole space.
  bool complete() const;
  bool is_real() const { return std::holds_alternative<RealBasis>(basis_); }

  Eigen::MatrixXcd matrix() const;
  double trace() const { return weights_.sum(); }
  /// Tr(rho A) and Tr(rho A^2) - Tr(rho A)^2.
  double expectation(const SparseHermitian& a) const;
  double variance(const SparseHermitian& a) const;

  /// Overlaps <v_i|u_j> between the bases of this and other, restricted to
  /// the given columns (all when empty).
  Eigen::MatrixXcd overlap(const MixedState& other, const std::vector<Eigen::Index>& rows = {},
                           const std::vector<Eigen::Index>& cols = {}) const;
  Eigen::MatrixXd overlap_real(const MixedState& other,
                               const std::vector<Eigen::Index>& rows = {},
                               const std::vector<Eigen::Index>& cols = {}) const;

  /// Per-eigenvector <v|A|v> and <v|A^2|v>.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> diagonal_moments(const SparseHermitian& a) const;

 private:
  MixedState() = default;
  void check() const;

  Eigen::VectorXd weights_;
  std::variant<RealBasis, ComplexBasis> basis_;
  std::optional<double> temperature_;
};

/// exp(-H/T)/Z from the dense spectrum of H. Throws DomainError for T <= 0
/// and CapacityError above the dense cutoff.
MixedState gibbs_state(const ChainParams& p, double temperature);

/// Dense spectra of H(field) for one chain, kept so that several
/// temperatures and estimators reuse each diagonalization. Not thread-safe.
class ThermalFamily {
 public:
  explicit ThermalFamily(ChainParams base);
  std::shared_ptr<const DenseSpectrum> spectrum(double field);
  MixedState gibbs(double field, double temperature);
  const ChainParams& params() const { return base_; }

 private:
  ChainParams base_;
  std::map<double, std::shared_ptr<const DenseSpectrum>> spectra_;
};

/// Gibbs weights for a spectrum, computed relative to the lowest level.
Eigen::VectorXd gibbs_weights(const Eigen::VectorXd& energies, double temperature);

/// Tr sqrt(sqrt(rho) sigma sqrt(rho)) as the nuclear norm of
/// diag(sqrt p) <v|u> diag(sqrt q), dropping weights below 1e-32.
double uhlmann_fidelity(const MixedState& a, const MixedState& b);
double uhlmann_infidelity(const MixedState& a, const MixedState& b);

/// sqrt(Tr[sqrt(rho) sqrt(sigma)]).
double tilde_fidelity(const MixedState& a, const MixedState& b);
double tilde_infidelity(const MixedState& a, const MixedState& b);

struct ThermalQfi {
  double g_tilde = 0.0;    // 8 chi_tilde
  double exact_qfi = 0.0;  // 4 chi from the Uhlmann fidelity
  double chi_tilde = 0.0;
  double chi = 0.0;
  double delta_used = 0.0;
  /// chi_tilde <= chi <= 2 chi_tilde, up to 1e-6 relative.
  bool sandwich_holds = false;
};

/// Default step for mixed-state finite differences.
inline constexpr double kThermalDelta = 1e-3;
inline FiniteDifference thermal_fd() { return FiniteDifference{kThermalDelta}; }

ThermalQfi thermal_qfi_bounds(const ChainParams& p, double temperature,
                              const FiniteDifference& fd = thermal_fd(),
                              ThermalFamily* family = nullptr);

PrecisionResult thermal_precision(const ChainParams& p, double temperature,
                                  const SparseHermitian& observable, ObservableTag tag,
                                  const FiniteDifference& fd = thermal_fd(),
                                  ThermalFamily* family = nullptr);

/// Same estimator over several temperatures, computing each eigenbasis
/// moment once.
std::vector<PrecisionResult> thermal_precision(const ChainParams& p,
                                               const std::vector<double>& temperatures,
                                               const SparseHermitian& observable,
                                               ObservableTag tag,
                                               const FiniteDifference& fd = thermal_fd(),
                                               ThermalFamily* family = nullptr);

}  // namespace critmet
