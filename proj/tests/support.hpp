#pragma once

// Dense reference helpers for the unit tests. Nothing here calls into the
// library's Kronecker or superoperator code, so they act as independent oracles.

#include "tripartite/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace testing_support {

using tripartite::cplx;
using tripartite::DenseMat;

// Explicit-loop Kronecker product.
inline DenseMat dense_kron(const DenseMat& a, const DenseMat& b) {
  DenseMat out = DenseMat::Zero(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline DenseMat dense_lowering(int n) {
  DenseMat a = DenseMat::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

inline double max_abs(const DenseMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline DenseMat random_hermitian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (m + m.adjoint());
}

// Random full-rank density matrix.
inline DenseMat random_density(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  DenseMat rho = m * m.adjoint();
  return rho / rho.trace().real();
}

inline Eigen::VectorXd hermitian_eigenvalues(const DenseMat& m) {
  Eigen::SelfAdjointEigenSolver<DenseMat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace testing_support
