#pragma once

#include <Eigen/Dense>

namespace lcfusn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Construction symmetrizes the input after checking
/// that it is symmetric up to rounding, so entry(i,j) == entry(j,i) exactly.
/// Positive definiteness is not assumed; operations that need it check.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix diagonal(const Vector& diag);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Lower-triangular L with L L' = A. Throws NotPositiveDefinite when a pivot
/// falls below dim * eps * max(diag A).
Matrix cholesky(const SymMatrix& a);

/// Symmetric PSD square root by eigendecomposition. Eigenvalues in
/// [-1e-12 * spectral radius, 0) are clamped to zero; anything more negative
/// throws NotPSD.
SymMatrix sqrt_psd(const SymMatrix& a);

/// Inverse of the symmetric square root of a positive definite matrix.
SymMatrix inv_sqrt_pd(const SymMatrix& a);

SymMatrix inverse_pd(const SymMatrix& a);

/// log |A| from a Cholesky factor.
double log_det_from_cholesky(const Matrix& chol) noexcept;

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// True when every entry of the matrix is finite.
bool all_finite(const Matrix& m) noexcept;

}  // namespace lcfusn
