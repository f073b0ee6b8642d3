#include "lcfusn/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lcfusn/error.hpp"
#include "lcfusn/normal.hpp"

namespace lcfusn {
namespace {

void require_positive(const Vector& y, const char* where) {
  for (Index i = 0; i < y.size(); ++i) {
    if (!(y(i) > 0.0) || std::isnan(y(i))) {
      std::ostringstream msg;
      msg << where << ": component " << i << " must be strictly positive";
      fail(ErrorKind::DomainError, msg.str());
    }
  }
}

Vector log_of(const Vector& y) { return y.array().log().matrix(); }

IndexSet complement(const IndexSet& target, Index n) {
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Index i : target) {
    if (i < 0 || i >= n || used[i]) fail(ErrorKind::BadPartition, "invalid or repeated index");
    used[i] = true;
  }
  IndexSet rest;
  for (Index i = 0; i < n; ++i) {
    if (!used[i]) rest.push_back(i);
  }
  return rest;
}

Matrix select_rows(const Matrix& a, const IndexSet& rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = a.row(rows[i]);
  return out;
}

Matrix select_block(const Matrix& a, const IndexSet& rows, const IndexSet& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
  }
  return out;
}

Vector select(const Vector& v, const IndexSet& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

void require_block_diagonal(const SymMatrix& sigma, const IndexSet& a, const IndexSet& b) {
  for (Index i : a) {
    for (Index j : b) {
      if (sigma(i, j) != 0.0) {
        fail(ErrorKind::NotBlockDiagonal,
             "scale matrix has cross covariance between the retained and remaining blocks");
      }
    }
  }
}

}  // namespace

SkewnessMatrix SkewnessMatrix::validate(const Matrix& delta) {
  if (delta.rows() == 0 || delta.cols() == 0) {
    fail(ErrorKind::DimensionError, "skewness matrix must be non-empty");
  }
  if (!all_finite(delta)) fail(ErrorKind::InvalidSkewness, "skewness matrix has non-finite entries");
  const double norm = spectral_norm(delta);
  if (!(norm <= 1.0 - kSkewnessMargin)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "skewness matrix has spectral norm " << norm << ", which must be below 1";
    fail(ErrorKind::InvalidSkewness, msg.str());
  }
  return SkewnessMatrix(delta, norm);
}

SkewnessMatrix SkewnessMatrix::parsimonious(double delta, Index n, Index m) {
  return validate(Matrix::Constant(n, m, delta));
}

SkewnessMatrix delta_from_lambda(const Matrix& lambda) {
  const Index m = lambda.cols();
  const Matrix gram = Matrix::Identity(m, m) + lambda.transpose() * lambda;
  const SymMatrix root_inv = inv_sqrt_pd(SymMatrix(gram));
  const Matrix delta = lambda * root_inv.matrix();
  // The exact map has norm < 1 for every Lambda; huge Lambda can round the
  // norm up to the margin, so shrink by the margin if needed.
  const double norm = spectral_norm(delta);
  if (norm > 1.0 - kSkewnessMargin) {
    return SkewnessMatrix::validate(delta * ((1.0 - 2.0 * kSkewnessMargin) / norm));
  }
  return SkewnessMatrix::validate(delta);
}

LcfusnParams::LcfusnParams(Vector mu, SymMatrix sigma, SkewnessMatrix delta)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), delta_(std::move(delta)) {
  const Index n = mu_.size();
  if (n == 0 || sigma_.dim() != n || delta_.n() != n) {
    fail(ErrorKind::DimensionError, "location, scale and skewness dimensions disagree");
  }
  if (!mu_.allFinite()) fail(ErrorKind::NonFinite, "location has non-finite entries");
  const Matrix chol = cholesky(sigma_);
  log_det_sigma_ = log_det_from_cholesky(chol);
  sigma_sqrt_ = sqrt_psd(sigma_);
  sigma_inv_sqrt_ = inv_sqrt_pd(sigma_);
  const Matrix& d = delta_.matrix();
  skew_cov_ = SymMatrix(Matrix::Identity(d.cols(), d.cols()) - d.transpose() * d);
  residual_sqrt_ = sqrt_psd(SymMatrix(Matrix::Identity(n, n) - d * d.transpose()));
}

LcfusnParams LcfusnParams::standard(SkewnessMatrix delta) {
  const Index n = delta.n();
  return LcfusnParams(Vector::Zero(n), SymMatrix::identity(n), std::move(delta));
}

bool LcfusnParams::is_standard() const {
  return mu_.isZero(0.0) && sigma_.matrix().isIdentity(0.0);
}

Vector LcfusnParams::standardize(const Vector& z) const {
  return sigma_inv_sqrt_.matrix() * (z - mu_);
}

double log_mvn_cdf(const Vector& upper, const SymMatrix& cov, const MvnOptions& opts) {
  if (upper.size() == 1 && upper(0) < kInfinity && upper(0) > -kInfinity) {
    return log_norm_cdf(upper(0) / std::sqrt(cov(0, 0)));
  }
  return std::log(mvn_cdf(upper, cov, opts).value);
}

double cfusn_logpdf(const Vector& z, const LcfusnParams& params, const MvnOptions& opts) {
  if (z.size() != params.n()) fail(ErrorKind::DimensionError, "cfusn_logpdf: dimension mismatch");
  const Vector u = params.standardize(z);
  const double m = static_cast<double>(params.m());
  const double n = static_cast<double>(params.n());
  const Vector skew_arg = params.delta().matrix().transpose() * u;
  return m * std::numbers::ln2 - 0.5 * params.log_det_sigma() - 0.5 * u.squaredNorm() -
         n * kLogSqrt2Pi + log_mvn_cdf(skew_arg, params.skew_cov(), opts);
}

double lcfusn_logpdf(const Vector& y, const LcfusnParams& params, const MvnOptions& opts) {
  if (y.size() != params.n()) fail(ErrorKind::DimensionError, "lcfusn_logpdf: dimension mismatch");
  require_positive(y, "lcfusn_logpdf");
  const Vector z = log_of(y);
  return cfusn_logpdf(z, params, opts) - z.sum();
}

CdfResult lcfusn_cdf(const Vector& y, const LcfusnParams& params, const MvnOptions& opts) {
  const Index n = params.n();
  const Index m = params.m();
  if (y.size() != n) fail(ErrorKind::DimensionError, "lcfusn_cdf: dimension mismatch");
  require_positive(y, "lcfusn_cdf");
  if (n + m > kMaxMvnDim) {
    fail(ErrorKind::DimensionTooLarge, "lcfusn_cdf: n + m exceeds the supported cdf dimension");
  }
  Vector upper = Vector::Zero(n + m);
  for (Index i = 0; i < n; ++i) {
    upper(i) = y(i) >= kInfinity ? kInfinity : std::log(y(i)) - params.mu()(i);
  }
  Matrix omega(n + m, n + m);
  const Matrix cross = -params.sigma_sqrt().matrix() * params.delta().matrix();
  omega.topLeftCorner(n, n) = params.sigma().matrix();
  omega.topRightCorner(n, m) = cross;
  omega.bottomLeftCorner(m, n) = cross.transpose();
  omega.bottomRightCorner(m, m) = Matrix::Identity(m, m);
  CdfResult r = mvn_cdf(upper, SymMatrix(omega), opts);
  const double scale = std::ldexp(1.0, static_cast<int>(m));
  r.value = std::min(1.0, std::max(0.0, r.value * scale));
  r.error_estimate *= scale;
  return r;
}

MomentOrder::MomentOrder(std::vector<int> t) : t_(std::move(t)) {
  if (t_.empty()) fail(ErrorKind::DimensionError, "moment order must be non-empty");
  for (int v : t_) {
    if (v < 0) fail(ErrorKind::DomainError, "moment orders must be non-negative");
  }
}

Vector MomentOrder::as_vector() const {
  Vector v(size());
  for (Index i = 0; i < size(); ++i) v(i) = t_[i];
  return v;
}

double mixed_moment(const MomentOrder& t, const LcfusnParams& params) {
  if (t.size() != params.n()) fail(ErrorKind::DimensionError, "mixed_moment: order length must equal n");
  const Vector tv = t.as_vector();
  const Vector arg = params.delta().matrix().transpose() * (params.sigma_sqrt().matrix() * tv);
  double log_phi = 0.0;
  for (Index j = 0; j < arg.size(); ++j) log_phi += log_norm_cdf(arg(j));
  const double m = static_cast<double>(params.m());
  return std::exp(tv.dot(params.mu()) + 0.5 * tv.dot(params.sigma().matrix() * tv) +
                  m * std::numbers::ln2 + log_phi);
}

ShapeCoefficients shape_coefficients(const SkewnessMatrix& delta) {
  if (delta.n() != 1) fail(ErrorKind::DimensionError, "shape_coefficients requires n = 1");
  const int m = static_cast<int>(delta.m());
  auto phi_m = [&](double k) {
    double p = 1.0;
    for (Index j = 0; j < delta.m(); ++j) p *= norm_cdf(k * delta.matrix()(0, j));
    return p;
  };
  const double e = std::numbers::e;
  const double p1 = phi_m(1.0), p2 = phi_m(2.0), p3 = phi_m(3.0), p4 = phi_m(4.0);
  const double t = std::ldexp(1.0, m);
  const double t2 = t * t;

  // Third central moment over the variance^{3/2}, both divided by 2^m e^{3/2}.
  const double var_core = e * p2 - t * p1 * p1;
  const double skewness = (e * e * e * p3 - t * p1 * (3.0 * e * p2 - 2.0 * t * p1 * p1)) /
                          (std::sqrt(t) * std::pow(var_core, 1.5));

  const double kurt_num = std::pow(e, 6) * p4 -
                          t * (4.0 * e * e * e * p1 * p3 - 3.0 * 2.0 * t * e * p1 * p1 * p2 +
                               3.0 * t2 * std::pow(p1, 4));
  const double kurt_den =
      t * (e * e * p2 * p2 - 2.0 * t * e * p2 * p1 * p1 + t2 * std::pow(p1, 4));
  return ShapeCoefficients{skewness, kurt_num / kurt_den};
}

LcfusnParams marginal(const LcfusnParams& params, const IndexSet& keep) {
  if (keep.empty()) fail(ErrorKind::BadPartition, "marginal: empty index set");
  const IndexSet rest = complement(keep, params.n());
  require_block_diagonal(params.sigma(), keep, rest);
  return LcfusnParams(select(params.mu(), keep),
                      SymMatrix(select_block(params.sigma().matrix(), keep, keep)),
                      SkewnessMatrix::validate(select_rows(params.delta().matrix(), keep)));
}

double conditional_logpdf(const Vector& y1, const Vector& y2, const LcfusnParams& params,
                          const IndexSet& target, const MvnOptions& opts) {
  const IndexSet given = complement(target, params.n());
  if (target.empty() || given.empty()) {
    fail(ErrorKind::BadPartition, "conditional_logpdf: both blocks must be non-empty");
  }
  if (y1.size() != static_cast<Index>(target.size()) ||
      y2.size() != static_cast<Index>(given.size())) {
    fail(ErrorKind::DimensionError, "conditional_logpdf: block sizes do not match the split");
  }
  require_positive(y1, "conditional_logpdf");
  require_positive(y2, "conditional_logpdf");
  require_block_diagonal(params.sigma(), target, given);

  const Matrix& sig = params.sigma().matrix();
  const SymMatrix s11(select_block(sig, target, target));
  const SymMatrix s22(select_block(sig, given, given));
  const Matrix d1 = select_rows(params.delta().matrix(), target);
  const Matrix d2 = select_rows(params.delta().matrix(), given);
  const Vector z1 = log_of(y1);
  const Vector u1 = inv_sqrt_pd(s11).matrix() * (z1 - select(params.mu(), target));
  const Vector u2 = inv_sqrt_pd(s22).matrix() * (log_of(y2) - select(params.mu(), given));
  const Index m = params.m();
  const SymMatrix cov_given(Matrix::Identity(m, m) - d2.transpose() * d2);
  const Vector shift = d2.transpose() * u2;

  const double n1 = static_cast<double>(target.size());
  return -z1.sum() - 0.5 * log_det_from_cholesky(cholesky(s11)) - 0.5 * u1.squaredNorm() -
         n1 * kLogSqrt2Pi + log_mvn_cdf(d1.transpose() * u1 + shift, params.skew_cov(), opts) -
         log_mvn_cdf(shift, cov_given, opts);
}

IndependenceVerdict independence_partition(const SkewnessMatrix& delta, Index n1, Index m1) {
  const Index n = delta.n();
  const Index m = delta.m();
  if (n1 <= 0 || n1 >= n || m1 <= 0 || m1 >= m) {
    fail(ErrorKind::BadPartition, "independence_partition: both row and column blocks must be non-empty");
  }
  const Matrix& d = delta.matrix();
  const bool off_zero = d.topRightCorner(n1, m - m1).isZero(0.0) &&
                        d.bottomLeftCorner(n - n1, m1).isZero(0.0);
  if (off_zero) return IndependenceVerdict::IndependentCaseI;
  const bool diag_zero = d.topLeftCorner(n1, m1).isZero(0.0) &&
                         d.bottomRightCorner(n - n1, m - m1).isZero(0.0);
  if (diag_zero) return IndependenceVerdict::IndependentCaseII;
  return IndependenceVerdict::NotEstablished;
}

Matrix sample(const LcfusnParams& params, Index count, RandomStream& rng) {
  if (count < 1) fail(ErrorKind::DomainError, "sample: count must be at least 1");
  const Index n = params.n();
  const Index m = params.m();
  const Matrix& d = params.delta().matrix();
  const Matrix& root = params.residual_sqrt().matrix();
  const Matrix& sroot = params.sigma_sqrt().matrix();
  Matrix out(count, n);
  Vector abs_d(m), v(n);
  for (Index r = 0; r < count; ++r) {
    for (Index j = 0; j < m; ++j) abs_d(j) = std::abs(rng.normal());
    for (Index i = 0; i < n; ++i) v(i) = rng.normal();
    const Vector x = d * abs_d + root * v;
    out.row(r) = (params.mu() + sroot * x).array().exp().matrix().transpose();
  }
  return out;
}

}  // namespace lcfusn
