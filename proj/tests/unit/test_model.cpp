#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "critmet/eig.hpp"
#include "critmet/error.hpp"
#include "critmet/model.hpp"
#include "oracles.hpp"

using namespace critmet;

namespace {

double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

Eigen::VectorXd dense_eigenvalues(const SparseHermitian& h) {
  return full_diagonalize(h.to_dense()).values;
}

}  // namespace

TEST(Model, TwoSiteXXMatchesHandMatrix) {
  // Basis uu, ud, du, dd: the exchange only couples ud and du, with -2.
  Eigen::MatrixXcd hand = Eigen::MatrixXcd::Zero(4, 4);
  hand(1, 2) = -2.0;
  hand(2, 1) = -2.0;
  const SparseHermitian h = build_hamiltonian({2, 0.0, 0.0});
  EXPECT_EQ(max_diff(h.to_dense(), hand), 0.0);

  const Eigen::VectorXd ev = dense_eigenvalues(h);
  const double expected[] = {-2.0, 0.0, 0.0, 2.0};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], expected[i], 1e-14);
}

TEST(Model, UpUpAnnihilatedByExchange) {
  const SparseHermitian h = build_hamiltonian({2, 0.0, 0.0});
  const Vector out = apply(h, PureState::basis(4, basis_index("uu")));
  EXPECT_EQ(out.norm(), 0.0);
}

TEST(Model, MatchesKroneckerBuilderEntrywise) {
  const SparseHermitian h = build_hamiltonian({4, 0.5, 0.1});
  EXPECT_LT(max_diff(h.to_dense(), oracle::hamiltonian(4, 0.5, 0.1)), 1e-14);
}

TEST(Model, SparseAndDenseBuildersAgreeOnGrid) {
  for (int n = 2; n <= 6; ++n) {
    for (double jz : {-0.9, -0.5, 0.0, 0.3, 1.0}) {
      for (double lambda : {-0.2, 0.0, 0.05, 0.7}) {
        const SparseHermitian h = build_hamiltonian({n, jz, lambda});
        EXPECT_LT(max_diff(h.to_dense(), oracle::hamiltonian(n, jz, lambda)), 1e-14)
            << "N=" << n << " jz=" << jz << " lambda=" << lambda;
      }
    }
  }
}

TEST(Model, HamiltonianIsReal) {
  EXPECT_TRUE(build_hamiltonian({6, 0.4, 0.2}).is_real());
}

TEST(Model, BasisIndexConvention) {
  EXPECT_EQ(basis_index("uu"), 0u);
  EXPECT_EQ(basis_index("ud"), 1u);
  EXPECT_EQ(basis_index("du"), 2u);
  EXPECT_EQ(basis_index("duu"), 4u);
  EXPECT_THROW(basis_index("ux"), DomainError);
}

TEST(Model, CenterSite) {
  EXPECT_EQ(center_site(8), 4);
  EXPECT_EQ(center_site(7), 3);
  EXPECT_EQ(center_site(2), 1);
}

TEST(H1, TwoSitesOffDiagonalWithNormTwo) {
  const Eigen::MatrixXcd m = build_h1({2}).to_dense();
  for (int i = 0; i < 4; ++i) EXPECT_EQ(m(i, i), cplx(0.0));
  EXPECT_NEAR(full_diagonalize(m).values.maxCoeff(), 2.0, 1e-14);
}

TEST(H1, FlipsOneSpin) {
  const Vector out = apply(build_h1({3}), PureState::basis(8, basis_index("uuu")));
  Vector expected = Vector::Zero(8);
  expected[basis_index("duu")] = 1.0;
  expected[basis_index("udu")] = 1.0;
  expected[basis_index("uud")] = 1.0;
  EXPECT_EQ((out - expected).norm(), 0.0);
}

TEST(H1, EqualsSumOfLocalOperators) {
  for (int n : {4, 6}) {
    const ChainParams p{n};
    SparseHermitian sum = SparseHermitian::zero(p.dim());
    for (int s = 1; s <= n; ++s) sum = sum + build_local_h(p, s);
    EXPECT_EQ(max_diff(sum.to_dense(), build_h1(p).to_dense()), 0.0);
  }
}

TEST(H1, OperatorNormIsN) {
  for (int n : {2, 5, 8}) {
    const ChainParams p{n};
    EXPECT_NEAR(dense_eigenvalues(build_h1(p)).cwiseAbs().maxCoeff(), n, 1e-12);
  }
}

TEST(LocalH, FirstSiteIsSigmaXTensorIdentity) {
  const Eigen::MatrixXcd expected = oracle::kron(oracle::pauli('x'), oracle::pauli('1'));
  EXPECT_EQ(max_diff(build_local_h({2}, 1).to_dense(), expected), 0.0);
}

TEST(LocalH, SquaresToIdentity) {
  for (int site = 1; site <= 5; ++site) {
    const Eigen::MatrixXcd m = build_local_h({5}, site).to_dense();
    EXPECT_EQ(max_diff(m * m, Eigen::MatrixXcd::Identity(32, 32)), 0.0);
  }
}

TEST(LocalH, RejectsSiteOutOfRange) {
  EXPECT_THROW(build_local_h({4}, 0), DomainError);
  EXPECT_THROW(build_local_h({4}, 5), DomainError);
}

TEST(Apply, IdentityAndZero) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Vector v(16);
  for (auto& x : v) x = cplx(g(rng), g(rng));
  const PureState s = PureState::normalized(v);
  EXPECT_EQ((apply(SparseHermitian::identity(16), s) - s.amplitudes()).norm(), 0.0);
  EXPECT_EQ(apply(SparseHermitian::zero(16), s).norm(), 0.0);
}

TEST(Apply, GroundStateIsEigenvector) {
  const SparseHermitian h = build_hamiltonian({8, 0.3, 0.1});
  const EigenResult gs = ground_state(h);
  const Vector hv = apply(h, gs.vectors[0]);
  EXPECT_LE((hv - gs.values[0] * gs.vectors[0].amplitudes()).norm(), kDefaultEigenTol);
}

TEST(Apply, DimensionMismatch) {
  EXPECT_THROW(apply(build_h1({3}), PureState::basis(4, 0)), DimensionMismatch);
}

TEST(Apply, IsLinear) {
  const SparseHermitian h = build_hamiltonian({5, -0.4, 0.3});
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Vector a(32), b(32);
  for (auto& x : a) x = cplx(g(rng), g(rng));
  for (auto& x : b) x = cplx(g(rng), g(rng));
  const cplx alpha(0.3, -1.1);
  const Vector lhs = h.apply(Vector(alpha * a + b));
  const Vector rhs = alpha * h.apply(a) + h.apply(b);
  EXPECT_LT((lhs - rhs).norm(), 1e-13);
}

TEST(Params, Validation) {
  EXPECT_THROW(build_hamiltonian({1}), DomainError);
  EXPECT_THROW(build_hamiltonian({4, std::nan(""), 0.0}), DomainError);
}

TEST(Params, CapacityLimit) {
  const std::size_t saved = max_sparse_dim();
  set_max_sparse_dim(64);
  EXPECT_THROW(build_hamiltonian({7}), CapacityError);
  EXPECT_NO_THROW(build_hamiltonian({6}));
  set_max_sparse_dim(saved);
}

TEST(PureState, RejectsZeroVector) {
  EXPECT_THROW(PureState::normalized(Vector::Zero(4)), DomainError);
}

TEST(PureState, IsNormalized) {
  Vector v(4);
  v << 1.0, cplx(0, 2), -3.0, 0.5;
  EXPECT_NEAR(PureState::normalized(v).amplitudes().norm(), 1.0, 1e-15);
}

TEST(Variance, EigenstateOfObservableHasZeroVariance) {
  const PureState s = PureState::basis(8, basis_index("udu"));
  EXPECT_EQ(variance(build_h1({3}), s), 3.0);
  SparseHermitian id = SparseHermitian::identity(8);
  EXPECT_EQ(variance(id, s), 0.0);
}

TEST(Sparse, CooRoundTrip) {
  const SparseHermitian h = build_hamiltonian({4, 0.5, 0.1});
  std::stringstream ss;
  h.write_coo(ss);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "16 " + std::to_string(h.nnz()));
  ss.seekg(0);
  const SparseHermitian back = SparseHermitian::read_coo(ss);
  EXPECT_EQ(max_diff(back.to_dense(), h.to_dense()), 0.0);
}

TEST(Sparse, RejectsLowerTriangleAndComplexDiagonal) {
  EXPECT_THROW(SparseHermitian::from_upper(4, {{2, 1, 1.0}}), DomainError);
  EXPECT_THROW(SparseHermitian::from_upper(4, {{1, 1, cplx(0, 1)}}), DomainError);
}

TEST(Sparse, DropsTinyEntries) {
  const SparseHermitian h = SparseHermitian::from_upper(4, {{0, 1, 1e-16}, {0, 2, 1.0}});
  EXPECT_EQ(h.nnz(), 2u);
}

// Property: every built operator is exactly Hermitian.
TEST(Property, HermiticityIsExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const ChainParams p{2 + k % 7, u(rng), u(rng)};
    EXPECT_EQ(build_hamiltonian(p).max_hermiticity_defect(), 0.0);
    EXPECT_EQ(build_h1(p).max_hermiticity_defect(), 0.0);
    EXPECT_EQ(build_local_h(p, 1 + k % p.n_sites).max_hermiticity_defect(), 0.0);
  }
  const SparseHermitian complex_op =
      SparseHermitian::from_upper(4, {{0, 1, cplx(0.3, 0.7)}, {1, 3, cplx(-1, 2)}, {2, 2, 1.5}});
  EXPECT_EQ(complex_op.max_hermiticity_defect(), 0.0);
}

// Property: H(lambda) = H(0) + lambda H1 entrywise.
TEST(Property, FieldEntersLinearly) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> sizes(2, 8);
  for (int k = 0; k < 10; ++k) {
    const ChainParams p{sizes(rng), u(rng), u(rng)};
    const Eigen::MatrixXcd lhs = build_hamiltonian(p).to_dense();
    const Eigen::MatrixXcd rhs = (build_hamiltonian(p.with_field(0.0)) + build_h1(p).scaled(p.field)).to_dense();
    EXPECT_LT(max_diff(lhs, rhs), 1e-15) << "N=" << p.n_sites;
  }
}

// Property: the z-axis pi rotation maps H(+d) onto H(-d).
TEST(Property, SpectraAtOppositeFieldsCoincide) {
  for (int n = 2; n <= 8; ++n) {
    for (double d : {1e-3, 0.1, 0.5}) {
      const Eigen::VectorXd plus = dense_eigenvalues(build_hamiltonian({n, 0.3, d}));
      const Eigen::VectorXd minus = dense_eigenvalues(build_hamiltonian({n, 0.3, -d}));
      EXPECT_LT((plus - minus).cwiseAbs().maxCoeff(), 1e-10) << "N=" << n << " d=" << d;
    }
  }
}
