#include "lcfusn/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lcfusn/error.hpp"

namespace lcfusn {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    fail(ErrorKind::DimensionError, "SymMatrix: matrix must be square and non-empty");
  }
  if (!all_finite(m)) fail(ErrorKind::NonFinite, "SymMatrix: non-finite entry");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    fail(ErrorKind::DomainError, "SymMatrix: matrix is not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  return SymMatrix(Matrix(diag.asDiagonal()));
}

Matrix cholesky(const SymMatrix& a) {
  const Eigen::Index n = a.dim();
  const Matrix& A = a.matrix();
  const double threshold =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
      std::max(A.diagonal().maxCoeff(), 0.0);
  Matrix L = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = A(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
    if (!(pivot > threshold)) {
      std::ostringstream msg;
      msg << "cholesky: pivot " << pivot << " at index " << j << " is not positive";
      fail(ErrorKind::NotPositiveDefinite, msg.str());
    }
    const double d = std::sqrt(pivot);
    L(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = A(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / d;
    }
  }
  return L;
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::NonFinite, "eigendecomposition failed");
  }
  return solver;
}

}  // namespace

SymMatrix sqrt_psd(const SymMatrix& a) {
  const auto solver = eigen_of(a);
  Vector ev = solver.eigenvalues();
  const double radius = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-12 * radius) {
      std::ostringstream msg;
      msg << "sqrt_psd: eigenvalue " << ev(i) << " is negative";
      fail(ErrorKind::NotPSD, msg.str());
    }
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  const Matrix& V = solver.eigenvectors();
  return SymMatrix(V * ev.asDiagonal() * V.transpose());
}

SymMatrix inv_sqrt_pd(const SymMatrix& a) {
  const auto solver = eigen_of(a);
  const Vector& ev = solver.eigenvalues();
  const double threshold = static_cast<double>(a.dim()) *
                           std::numeric_limits<double>::epsilon() *
                           ev.cwiseAbs().maxCoeff();
  if (!(ev.minCoeff() > threshold)) {
    fail(ErrorKind::NotPositiveDefinite, "inv_sqrt_pd: matrix is not positive definite");
  }
  const Matrix& V = solver.eigenvectors();
  return SymMatrix(V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose());
}

SymMatrix inverse_pd(const SymMatrix& a) {
  const Matrix L = cholesky(a);
  const Eigen::Index n = a.dim();
  Matrix inv = Matrix::Identity(n, n);
  L.triangularView<Eigen::Lower>().solveInPlace(inv);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return SymMatrix(inv);
}

double log_det_from_cholesky(const Matrix& chol) noexcept {
  return 2.0 * chol.diagonal().array().log().sum();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

bool all_finite(const Matrix& m) noexcept { return m.allFinite(); }

}  // namespace lcfusn
