#pragma once

// Independent dense reference implementations, built from Kronecker products
// and Eigen's own solvers so they share no code path with the library.

#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat pauli(char which) {
  Mat m = Mat::Zero(2, 2);
  switch (which) {
    case 'x': m(0, 1) = 1; m(1, 0) = 1; break;
    case 'y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'z': m(0, 0) = 1; m(1, 1) = -1; break;
    default: m = Mat::Identity(2, 2);
  }
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Product of single-site factors; site 1 is the leftmost (most significant) factor.
inline Mat site_op(int n, int site, char which) {
  Mat out = Mat::Identity(1, 1);
  for (int s = 1; s <= n; ++s) out = kron(out, s == site ? pauli(which) : pauli('1'));
  return out;
}

inline Mat bond_op(int n, int site, char which) {
  return site_op(n, site, which) * site_op(n, site + 1, which);
}

inline Mat h1(int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Mat out = Mat::Zero(dim, dim);
  for (int s = 1; s <= n; ++s) out += site_op(n, s, 'x');
  return out;
}

inline Mat hamiltonian(int n, double jz, double lambda) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Mat out = Mat::Zero(dim, dim);
  for (int s = 1; s < n; ++s) {
    out -= bond_op(n, s, 'x') + bond_op(n, s, 'y') + jz * bond_op(n, s, 'z');
  }
  return out + lambda * h1(n);
}

struct Spectrum {
  Eigen::VectorXd values;
  Mat vectors;
};

inline Spectrum spectrum(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Eigen::VectorXcd ground_state(int n, double jz, double lambda) {
  return spectrum(hamiltonian(n, jz, lambda)).vectors.col(0);
}

inline Mat gibbs(const Mat& h, double t) {
  const Spectrum s = spectrum(h);
  Eigen::VectorXd w = (-(s.values.array() - s.values[0]) / t).exp();
  w /= w.sum();
  return s.vectors * w.cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

inline Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  Eigen::VectorXd v = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * v.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

// Tr sqrt(sqrt(rho) sigma sqrt(rho)) by literal matrix square roots.
inline double uhlmann(const Mat& rho, const Mat& sigma) {
  const Mat r = psd_sqrt(rho);
  const Mat inner = r * sigma * r;
  return psd_sqrt((inner + inner.adjoint()) / 2.0).trace().real();
}

inline double tilde(const Mat& rho, const Mat& sigma) {
  return std::sqrt((psd_sqrt(rho) * psd_sqrt(sigma)).trace().real());
}

// Symmetric-logarithmic-derivative QFI of a Gibbs family in lambda:
// G = 2 sum_ij |d rho_ij|^2 / (p_i + p_j) in the energy eigenbasis, with
// d rho_ij = V_ij (p_i - p_j)/(E_i - E_j) off the degenerate blocks and
// -beta p_i (V_ij - delta_ij <V>) inside them.
inline double sld_qfi(int n, double jz, double lambda, double t) {
  const Spectrum s = spectrum(hamiltonian(n, jz, lambda));
  Eigen::VectorXd p = (-(s.values.array() - s.values[0]) / t).exp();
  p /= p.sum();
  const Mat v = s.vectors.adjoint() * h1(n) * s.vectors;
  double mean = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) mean += p[i] * v(i, i).real();
  double g = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      if (p[i] + p[j] < 1e-300) continue;
      cplx d;
      if (std::abs(s.values[i] - s.values[j]) > 1e-9) {
        d = v(i, j) * (p[i] - p[j]) / (s.values[i] - s.values[j]);
      } else {
        d = -p[i] / t * (v(i, j) - (i == j ? mean : 0.0));
      }
      g += 2.0 * std::norm(d) / (p[i] + p[j]);
    }
  }
  return g;
}

// exp(-i H t) v through the dense spectrum.
inline Eigen::VectorXcd evolve(const Mat& h, const Eigen::VectorXcd& v, double t) {
  const Spectrum s = spectrum(h);
  Eigen::VectorXcd phases(s.values.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = std::exp(cplx(0, -s.values[i] * t));
  return s.vectors * phases.asDiagonal() * (s.vectors.adjoint() * v);
}

}  // namespace oracle
