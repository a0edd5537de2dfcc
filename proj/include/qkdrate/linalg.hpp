#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "qkdrate/errors.hpp"

namespace qkdrate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr double kLn2 = std::numbers::ln2;

// Eigenvalues below this are treated as exact zeros.
inline constexpr double kEigenFloor = 1e-14;
// Support-inclusion tolerance for relative entropies.
inline constexpr double kSupportTol = 1e-10;

/// p * log2(p) with the 0 log 0 = 0 convention.
inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

/// Shannon entropy of a probability vector, in bits.
template <typename Range>
double shannon_entropy(const Range& probs) {
  double h = 0.0;
  for (double p : probs) h -= xlog2x(p);
  return h;
}

/// Omega = I_m (x) [[0, 1], [-1, 0]] for modes ordered (x1, p1, ..., xm, pm).
inline Matrix symplectic_form(Eigen::Index modes) {
  Matrix omega = Matrix::Zero(2 * modes, 2 * modes);
  for (Eigen::Index k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

inline bool is_symmetric(const Matrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.transpose()) <= tol;
}

/// Symmetric square root of a symmetric positive-definite matrix, and its inverse.
struct SpdRoots {
  Matrix sqrt;
  Matrix inv_sqrt;
};

inline SpdRoots spd_roots(const Matrix& a, const char* where) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) throw NumericalFailure(std::string(where) + ": eigensolver failed");
  const Vector& w = es.eigenvalues();
  if (w.minCoeff() <= 0.0) {
    throw ConditioningError(std::string(where) + ": matrix is not positive definite (min eigenvalue " +
                            std::to_string(w.minCoeff()) + ")");
  }
  const Matrix& u = es.eigenvectors();
  return {u * w.cwiseSqrt().asDiagonal() * u.transpose(),
          u * w.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose()};
}

/// Hermitian eigen-decomposition with eigenvalues in ascending order.
struct HermitianSpectrum {
  Vector values;
  CMatrix vectors;
};

inline HermitianSpectrum hermitian_spectrum(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalFailure("hermitian_spectrum: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Kronecker product of two dense matrices.
template <typename Derived1, typename Derived2>
auto kron(const Eigen::MatrixBase<Derived1>& a, const Eigen::MatrixBase<Derived2>& b) {
  using Scalar = typename Derived1::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace qkdrate
