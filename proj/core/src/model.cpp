#include "critmet/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "critmet/error.hpp"

namespace critmet {

namespace {

constexpr double kDropThreshold = 1e-15;

std::atomic<std::size_t> g_max_sparse_dim{std::size_t{1} << 22};
std::atomic<std::size_t> g_dense_cutoff{std::size_t{1} << 12};

void check_capacity(const ChainParams& p) {
  if (p.n_sites >= 63 || p.dim() > max_sparse_dim()) {
    throw CapacityError("chain of " + std::to_string(p.n_sites) +
                        " sites exceeds the sparse dimension budget of " +
                        std::to_string(max_sparse_dim()));
  }
}

// Bit position of a one-based site: site 1 is the most significant bit.
inline std::size_t site_bit(int n_sites, int site) {
  return std::size_t{1} << (n_sites - site);
}

}  // namespace

std::size_t max_sparse_dim() { return g_max_sparse_dim.load(); }
void set_max_sparse_dim(std::size_t dim) { g_max_sparse_dim.store(dim); }
std::size_t dense_cutoff() { return g_dense_cutoff.load(); }
void set_dense_cutoff(std::size_t dim) { g_dense_cutoff.store(dim); }

void ChainParams::validate() const {
  if (n_sites < 2) {
    throw DomainError("n_sites must be at least 2, got " + std::to_string(n_sites));
  }
  if (!std::isfinite(j_z) || !std::isfinite(field)) {
    throw DomainError("couplings must be finite");
  }
}

// ---------------------------------------------------------------------------
// SparseHermitian

SparseHermitian SparseHermitian::from_full(std::size_t dim, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseHermitian op;
  op.dim_ = dim;
  op.row_ptr_.assign(dim + 1, 0);
  op.cols_.reserve(entries.size());
  op.values_.reserve(entries.size());

  std::size_t i = 0;
  for (std::size_t r = 0; r < dim; ++r) {
    while (i < entries.size() && entries[i].row == r) {
      const std::size_t c = entries[i].col;
      cplx sum = 0.0;
      while (i < entries.size() && entries[i].row == r && entries[i].col == c) {
        sum += entries[i].value;
        ++i;
      }
      if (std::abs(sum) >= kDropThreshold) {
        op.cols_.push_back(static_cast<std::uint32_t>(c));
        op.values_.push_back(sum);
      }
    }
    op.row_ptr_[r + 1] = op.cols_.size();
  }

  op.real_ = std::all_of(op.values_.begin(), op.values_.end(),
                         [](const cplx& v) { return v.imag() == 0.0; });
  if (op.real_) {
    op.real_values_.resize(op.values_.size());
    std::transform(op.values_.begin(), op.values_.end(), op.real_values_.begin(),
                   [](const cplx& v) { return v.real(); });
  }
  return op;
}

SparseHermitian SparseHermitian::from_upper(std::size_t dim, std::vector<Triplet> upper) {
  std::vector<Triplet> full;
  full.reserve(2 * upper.size());
  for (const Triplet& t : upper) {
    if (t.row >= dim || t.col >= dim) {
      throw DimensionMismatch("entry index out of range");
    }
    if (t.row > t.col) {
      throw DomainError("from_upper expects row <= col");
    }
    if (t.row == t.col) {
      if (t.value.imag() != 0.0) throw DomainError("diagonal entries must be real");
      full.push_back(t);
    } else {
      full.push_back(t);
      full.push_back({t.col, t.row, std::conj(t.value)});
    }
  }
  return from_full(dim, std::move(full));
}

SparseHermitian SparseHermitian::identity(std::size_t dim) {
  std::vector<Triplet> diag;
  diag.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) diag.push_back({i, i, 1.0});
  return from_full(dim, std::move(diag));
}

SparseHermitian SparseHermitian::zero(std::size_t dim) { return from_full(dim, {}); }

cplx SparseHermitian::entry(std::size_t row, std::size_t col) const {
  if (row >= dim_ || col >= dim_) throw DimensionMismatch("entry index out of range");
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(col));
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

void SparseHermitian::apply(const Vector& in, Vector& out) const {
  if (static_cast<std::size_t>(in.size()) != dim_) {
    throw DimensionMismatch("operator/vector dimension mismatch");
  }
  out.resize(in.size());
  const cplx* x = in.data();
  cplx* y = out.data();
  if (real_) {
    for (std::size_t r = 0; r < dim_; ++r) {
      double re = 0.0, im = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        const double a = real_values_[k];
        const cplx& v = x[cols_[k]];
        re += a * v.real();
        im += a * v.imag();
      }
      y[r] = cplx(re, im);
    }
  } else {
    for (std::size_t r = 0; r < dim_; ++r) {
      cplx acc = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        acc += values_[k] * x[cols_[k]];
      }
      y[r] = acc;
    }
  }
}

Vector SparseHermitian::apply(const Vector& in) const {
  Vector out;
  apply(in, out);
  return out;
}

void SparseHermitian::apply_add(const Vector& in, cplx alpha, Vector& out) const {
  if (static_cast<std::size_t>(in.size()) != dim_ ||
      static_cast<std::size_t>(out.size()) != dim_) {
    throw DimensionMismatch("operator/vector dimension mismatch");
  }
  for (std::size_t r = 0; r < dim_; ++r) {
    cplx acc = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      acc += values_[k] * in[cols_[k]];
    }
    out[static_cast<Eigen::Index>(r)] += alpha * acc;
  }
}

double SparseHermitian::expectation(const Vector& v) const {
  return v.dot(apply(v)).real();
}

Eigen::MatrixXcd SparseHermitian::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      m(static_cast<Eigen::Index>(r), cols_[k]) = values_[k];
    }
  }
  return m;
}

Eigen::MatrixXd SparseHermitian::to_dense_real() const {
  if (!real_) throw DomainError("operator has complex entries");
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      m(static_cast<Eigen::Index>(r), cols_[k]) = real_values_[k];
    }
  }
  return m;
}

SparseHermitian SparseHermitian::operator+(const SparseHermitian& other) const {
  if (dim_ != other.dim_) throw DimensionMismatch("operator dimensions differ");
  std::vector<Triplet> all;
  all.reserve(nnz() + other.nnz());
  for (const SparseHermitian* op : {this, &other}) {
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t k = op->row_ptr_[r]; k < op->row_ptr_[r + 1]; ++k) {
        all.push_back({r, op->cols_[k], op->values_[k]});
      }
    }
  }
  return from_full(dim_, std::move(all));
}

SparseHermitian SparseHermitian::scaled(double factor) const {
  std::vector<Triplet> all;
  all.reserve(nnz());
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      all.push_back({r, cols_[k], factor * values_[k]});
    }
  }
  return from_full(dim_, std::move(all));
}

double SparseHermitian::max_hermiticity_defect() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      worst = std::max(worst, std::abs(values_[k] - std::conj(entry(cols_[k], r))));
    }
  }
  return worst;
}

void SparseHermitian::write_coo(std::ostream& os) const {
  os << dim_ << ' ' << nnz() << '\n';
  std::ostringstream line;
  line.precision(17);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      line.str("");
      line << r << ' ' << cols_[k] << ' ' << values_[k].real() << ' ' << values_[k].imag();
      os << line.str() << '\n';
    }
  }
}

SparseHermitian SparseHermitian::read_coo(std::istream& is) {
  std::size_t dim = 0, nnz = 0;
  if (!(is >> dim >> nnz)) throw DomainError("malformed coordinate-list header");
  std::vector<Triplet> entries;
  entries.reserve(nnz);
  for (std::size_t i = 0; i < nnz; ++i) {
    std::size_t r = 0, c = 0;
    double re = 0.0, im = 0.0;
    if (!(is >> r >> c >> re >> im)) {
      throw DomainError("malformed coordinate-list entry " + std::to_string(i));
    }
    if (r <= c) entries.push_back({r, c, cplx(re, im)});
  }
  return from_upper(dim, std::move(entries));
}

// ---------------------------------------------------------------------------
// PureState

PureState PureState::normalized(Vector v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DomainError("cannot normalize a zero or non-finite vector");
  }
  v /= norm;
  return PureState(std::move(v));
}

PureState PureState::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionMismatch("basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return PureState(std::move(v));
}

std::size_t basis_index(std::string_view spins) {
  std::size_t index = 0;
  for (char c : spins) {
    index <<= 1;
    if (c == 'd') {
      index |= 1;
    } else if (c != 'u') {
      throw DomainError("spin string may contain only 'u' and 'd'");
    }
  }
  return index;
}

int center_site(int n_sites) { return n_sites / 2; }

// ---------------------------------------------------------------------------
// Builders

SparseHermitian build_hamiltonian(const ChainParams& p) {
  p.validate();
  check_capacity(p);
  const std::size_t dim = p.dim();
  const int n = p.n_sites;

  std::vector<Triplet> upper;
  upper.reserve(dim * static_cast<std::size_t>(n + 1));
  for (std::size_t s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (int site = 1; site < n; ++site) {
      const std::size_t a = site_bit(n, site);
      const std::size_t b = site_bit(n, site + 1);
      const bool anti = ((s & a) != 0) != ((s & b) != 0);
      diag -= p.j_z * (anti ? -1.0 : 1.0);
      // sx sx + sy sy = 2 (s+ s- + s- s+): flips an antiparallel pair.
      if (anti) {
        const std::size_t t = s ^ a ^ b;
        if (s < t) upper.push_back({s, t, -2.0});
      }
    }
    upper.push_back({s, s, diag});
    if (p.field != 0.0) {
      for (int site = 1; site <= n; ++site) {
        const std::size_t t = s ^ site_bit(n, site);
        if (s < t) upper.push_back({s, t, p.field});
      }
    }
  }
  return SparseHermitian::from_upper(dim, std::move(upper));
}

SparseHermitian build_h1(const ChainParams& p) {
  p.validate();
  check_capacity(p);
  const std::size_t dim = p.dim();
  std::vector<Triplet> upper;
  upper.reserve(dim * static_cast<std::size_t>(p.n_sites) / 2);
  for (std::size_t s = 0; s < dim; ++s) {
    for (int site = 1; site <= p.n_sites; ++site) {
      const std::size_t t = s ^ site_bit(p.n_sites, site);
      if (s < t) upper.push_back({s, t, 1.0});
    }
  }
  return SparseHermitian::from_upper(dim, std::move(upper));
}

SparseHermitian build_local_h(const ChainParams& p, int site) {
  p.validate();
  check_capacity(p);
  if (site < 1 || site > p.n_sites) {
    throw DomainError("site " + std::to_string(site) + " outside [1, " +
                      std::to_string(p.n_sites) + "]");
  }
  const std::size_t dim = p.dim();
  const std::size_t bit = site_bit(p.n_sites, site);
  std::vector<Triplet> upper;
  upper.reserve(dim / 2);
  for (std::size_t s = 0; s < dim; ++s) {
    if ((s & bit) == 0) upper.push_back({s, s | bit, 1.0});
  }
  return SparseHermitian::from_upper(dim, std::move(upper));
}

Vector apply(const SparseHermitian& op, const PureState& s) {
  return op.apply(s.amplitudes());
}

double variance(const SparseHermitian& op, const PureState& s) {
  const Vector av = op.apply(s.amplitudes());
  const double mean = s.amplitudes().dot(av).real();
  const double second = av.squaredNorm();
  return std::max(0.0, second - mean * mean);
}

}  // namespace critmet
