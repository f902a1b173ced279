#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace critmet {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;

enum class Boundary { open };

/// Ferromagnetic XXZ chain in a field along x:
///   H = -sum_n (sx sx + sy sy + j_z sz sz)_{n,n+1} + field * sum_n sx_n
struct ChainParams {
  int n_sites = 2;
  double j_z = 0.0;
  double field = 0.0;
  Boundary boundary = Boundary::open;

  /// Throws DomainError unless n_sites >= 2 and the couplings are finite.
  void validate() const;
  std::size_t dim() const { return std::size_t{1} << n_sites; }
  ChainParams with_field(double f) const {
    ChainParams c = *this;
    c.field = f;
    return c;
  }
};

/// Hilbert-space budgets. The sparse limit guards operator construction,
/// the dense cutoff guards full diagonalization and mixed-state work.
std::size_t max_sparse_dim();
void set_max_sparse_dim(std::size_t dim);
std::size_t dense_cutoff();
void set_dense_cutoff(std::size_t dim);

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Hermitian operator in compressed-row form. Built from the upper triangle;
/// the lower triangle is the exact conjugate mirror, so O == O^dagger bitwise.
class SparseHermitian {
 public:
  SparseHermitian() = default;

  /// Entries must satisfy row <= col; duplicates are summed and magnitudes
  /// below 1e-15 dropped. Diagonal entries must be real.
  static SparseHermitian from_upper(std::size_t dim, std::vector<Triplet> upper);
  static SparseHermitian identity(std::size_t dim);
  static SparseHermitian zero(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return cols_.size(); }
  bool is_real() const { return real_; }

  cplx entry(std::size_t row, std::size_t col) const;

  /// out = A * in
  void apply(const Vector& in, Vector& out) const;
  Vector apply(const Vector& in) const;
  /// out += alpha * A * in
  void apply_add(const Vector& in, cplx alpha, Vector& out) const;

  /// <v|A|v> for a (not necessarily normalized) vector.
  double expectation(const Vector& v) const;

  Eigen::MatrixXcd to_dense() const;
  /// Requires is_real().
  Eigen::MatrixXd to_dense_real() const;

  SparseHermitian operator+(const SparseHermitian& other) const;
  SparseHermitian scaled(double factor) const;

  /// max |A(r,c) - conj(A(c,r))|
  double max_hermiticity_defect() const;

  /// Coordinate list: header "dim nnz", then one "row col re im" line per
  /// stored entry (both triangles), row-major order.
  void write_coo(std::ostream& os) const;
  static SparseHermitian read_coo(std::istream& is);

 private:
  static SparseHermitian from_full(std::size_t dim, std::vector<Triplet> entries);

  std::size_t dim_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> cols_;
  std::vector<cplx> values_;
  std::vector<double> real_values_;
  bool real_ = true;
};

/// Normalized state vector over the 2^N computational basis.
class PureState {
 public:
  /// Normalizes v; throws DomainError for a zero or non-finite vector.
  static PureState normalized(Vector v);
  static PureState basis(std::size_t dim, std::size_t index);

  const Vector& amplitudes() const { return amps_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }

 private:
  explicit PureState(Vector v) : amps_(std::move(v)) {}
  Vector amps_;
};

/// Basis index of a product state written as a string of 'u'/'d' (site 1
/// first). Site 1 is the most significant bit; spin up is bit value 0.
std::size_t basis_index(std::string_view spins);

/// Site convention for the bulk observable: floor(N/2), one-based.
int center_site(int n_sites);

SparseHermitian build_hamiltonian(const ChainParams& p);
/// Sum of sx over all sites; operator norm equals N.
SparseHermitian build_h1(const ChainParams& p);
/// sx on a single one-based site.
SparseHermitian build_local_h(const ChainParams& p, int site);

Vector apply(const SparseHermitian& op, const PureState& s);

/// <s|A^2|s> - <s|A|s>^2, clamped at zero.
double variance(const SparseHermitian& op, const PureState& s);

}  // namespace critmet
