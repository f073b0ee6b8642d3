#pragma once

#include <vector>

#include "lcfusn/linalg.hpp"
#include "lcfusn/mvn.hpp"
#include "lcfusn/random.hpp"

namespace lcfusn {

using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/// Margin under the strict constraint ||Delta|| < 1.
inline constexpr double kSkewnessMargin = 1e-10;

/// n x m skewness matrix with spectral norm below 1.
class SkewnessMatrix {
 public:
  /// Throws InvalidSkewness unless spectral_norm(delta) <= 1 - kSkewnessMargin.
  static SkewnessMatrix validate(const Matrix& delta);
  /// delta * 1_{n,m}; valid iff |delta| < 1/sqrt(n m) (up to the margin).
  static SkewnessMatrix parsimonious(double delta, Index n, Index m);

  const Matrix& matrix() const noexcept { return delta_; }
  Index n() const noexcept { return delta_.rows(); }
  Index m() const noexcept { return delta_.cols(); }
  double norm() const noexcept { return norm_; }

 private:
  SkewnessMatrix(Matrix delta, double norm) : delta_(std::move(delta)), norm_(norm) {}
  Matrix delta_;
  double norm_;
};

/// Delta = Lambda (I_m + Lambda' Lambda)^{-1/2}; valid for every real Lambda.
SkewnessMatrix delta_from_lambda(const Matrix& lambda);

/// Location mu, scale Sigma and skewness Delta of the location-scale family.
/// Immutable; the symmetric square roots and covariance blocks used by every
/// density/sampling routine are computed once at construction.
class LcfusnParams {
 public:
  LcfusnParams(Vector mu, SymMatrix sigma, SkewnessMatrix delta);
  static LcfusnParams standard(SkewnessMatrix delta);

  const Vector& mu() const noexcept { return mu_; }
  const SymMatrix& sigma() const noexcept { return sigma_; }
  const SkewnessMatrix& delta() const noexcept { return delta_; }
  Index n() const noexcept { return mu_.size(); }
  Index m() const noexcept { return delta_.m(); }
  bool is_standard() const;

  const SymMatrix& sigma_sqrt() const noexcept { return sigma_sqrt_; }
  const SymMatrix& sigma_inv_sqrt() const noexcept { return sigma_inv_sqrt_; }
  double log_det_sigma() const noexcept { return log_det_sigma_; }
  /// I_m - Delta' Delta.
  const SymMatrix& skew_cov() const noexcept { return skew_cov_; }
  /// (I_n - Delta Delta')^{1/2}.
  const SymMatrix& residual_sqrt() const noexcept { return residual_sqrt_; }

  /// Sigma^{-1/2} (z - mu).
  Vector standardize(const Vector& z) const;

 private:
  Vector mu_;
  SymMatrix sigma_;
  SkewnessMatrix delta_;
  SymMatrix sigma_sqrt_;
  SymMatrix sigma_inv_sqrt_;
  double log_det_sigma_ = 0.0;
  SymMatrix skew_cov_;
  SymMatrix residual_sqrt_;
};

/// log P(Z <= upper), Z ~ N(0, cov), with closed forms for dim <= 2 and the
/// lattice rule above that.
double log_mvn_cdf(const Vector& upper, const SymMatrix& cov, const MvnOptions& opts = {});

/// Log density of the location-scale CFUSN law at z in R^n.
double cfusn_logpdf(const Vector& z, const LcfusnParams& params, const MvnOptions& opts = {});

/// Log density of the location-scale log-CFUSN law at y > 0; equals
/// cfusn_logpdf(ln y) - sum(ln y).
double lcfusn_logpdf(const Vector& y, const LcfusnParams& params, const MvnOptions& opts = {});

/// P(Y <= y) = 2^m P(Sigma^{1/2} N <= ln y - mu, T <= 0) where (N, T) is
/// jointly normal with cross covariance -Delta. For Sigma = I this is the
/// (n+m)-variate orthant form with Omega = [[I, -Delta], [-Delta', I]].
CdfResult lcfusn_cdf(const Vector& y, const LcfusnParams& params, const MvnOptions& opts = {});

/// Non-negative integer moment orders (t_1, ..., t_n).
class MomentOrder {
 public:
  explicit MomentOrder(std::vector<int> t);
  const std::vector<int>& values() const noexcept { return t_; }
  Index size() const noexcept { return static_cast<Index>(t_.size()); }
  Vector as_vector() const;

 private:
  std::vector<int> t_;
};

/// E prod Y_i^{t_i} = exp(t'mu + t'Sigma t / 2) 2^m Phi_m(Delta' Sigma^{1/2} t),
/// Phi_m taken at identity covariance (exact product of univariate cdfs).
/// The location-scale factor exp(t'mu + t'Sigma t/2) and Sigma^{1/2} inside
/// Phi_m come from the CFUSN moment generating function.
double mixed_moment(const MomentOrder& t, const LcfusnParams& params);

struct ShapeCoefficients {
  double skewness;
  double kurtosis;
};

/// Asymmetry and (non-excess) kurtosis coefficients of LCFUSN_{1,m}(Delta).
/// Delta must have a single row.
ShapeCoefficients shape_coefficients(const SkewnessMatrix& delta);

/// Sub-family for the components in `keep` (in the given order). With a
/// non-identity Sigma the kept block must have no cross covariance with the
/// dropped one (NotBlockDiagonal otherwise).
LcfusnParams marginal(const LcfusnParams& params, const IndexSet& keep);

/// log f(y1 | y2) where y1 holds the components listed in `target` and y2
/// the remaining ones in increasing index order. Sigma must be block
/// diagonal across the split.
double conditional_logpdf(const Vector& y1, const Vector& y2, const LcfusnParams& params,
                          const IndexSet& target, const MvnOptions& opts = {});

enum class IndependenceVerdict { IndependentCaseI, IndependentCaseII, NotEstablished };

/// Sufficient independence conditions for Y1 = rows [0, n1) against the
/// remaining rows, with Delta's columns split at m1:
///   case I  : Delta_12 = Delta_21 = 0
///   case II : Delta_11 = Delta_22 = 0
IndependenceVerdict independence_partition(const SkewnessMatrix& delta, Index n1, Index m1);

/// count x n matrix of draws exp(mu + Sigma^{1/2}(Delta|D| + (I - Delta Delta')^{1/2} V)),
/// D ~ N_m(0, I), V ~ N_n(0, I). Each row consumes m then n normals from rng.
Matrix sample(const LcfusnParams& params, Index count, RandomStream& rng);

}  // namespace lcfusn
