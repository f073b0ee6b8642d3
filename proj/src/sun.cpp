#include "lcfusn/sun.hpp"

#include <cmath>

#include "lcfusn/error.hpp"
#include "lcfusn/normal.hpp"

namespace lcfusn {
namespace {

IndexSet complement_sorted(const IndexSet& target, Index n) {
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

Matrix block(const Matrix& a, const IndexSet& rows, const IndexSet& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
  }
  return out;
}

// Builds eta/omega_bar/Omega_star for a location-scale block (mu, Sigma, Delta)
// with truncation point gamma and truncation covariance Gamma.
SunParams assemble(const Vector& mu, const Matrix& sigma, const Matrix& delta,
                   const Vector& gamma, const Matrix& gamma_cov) {
  const Index n = mu.size();
  const Index m = delta.cols();
  const Vector sd = sigma.diagonal().cwiseSqrt();
  const Vector inv_sd = sd.cwiseInverse();
  const Matrix corr = inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal();
  const Matrix delta_sun = inv_sd.asDiagonal() * sqrt_psd(SymMatrix(sigma)).matrix() * delta;
  Matrix star(m + n, m + n);
  star.topLeftCorner(m, m) = gamma_cov;
  star.topRightCorner(m, n) = delta_sun.transpose();
  star.bottomLeftCorner(n, m) = delta_sun;
  star.bottomRightCorner(n, n) = corr;
  star.bottomRightCorner(n, n).diagonal().setOnes();
  return SunParams(mu, gamma, sd, SymMatrix(star));
}

}  // namespace

SunParams::SunParams(Vector eta, Vector gamma, Vector omega_bar, SymMatrix omega_star,
                     const MvnOptions& opts)
    : eta_(std::move(eta)),
      gamma_(std::move(gamma)),
      omega_bar_(std::move(omega_bar)),
      omega_star_(std::move(omega_star)) {
  const Index n = eta_.size();
  const Index m = gamma_.size();
  if (n == 0 || m == 0 || omega_bar_.size() != n || omega_star_.dim() != n + m) {
    fail(ErrorKind::DimensionError, "SunParams: inconsistent dimensions");
  }
  if (!(omega_bar_.array() > 0.0).all()) {
    fail(ErrorKind::DomainError, "SunParams: omega_bar must be positive");
  }
  cholesky(omega_star_);
  const Matrix bar = omega_bar_block();
  for (Index i = 0; i < n; ++i) {
    if (std::abs(bar(i, i) - 1.0) > 1e-12) {
      fail(ErrorKind::DomainError, "SunParams: OmegaBar block must have a unit diagonal");
    }
  }
  omega_ = SymMatrix(omega_bar_.asDiagonal() * bar * omega_bar_.asDiagonal());
  const SymMatrix bar_inv = inverse_pd(SymMatrix(bar));
  const Matrix d = delta_block();
  skew_map_ = d.transpose() * bar_inv.matrix() * omega_bar_.cwiseInverse().asDiagonal();
  conditional_cov_ = SymMatrix(gamma_block() - d.transpose() * bar_inv.matrix() * d);
  log_normalizer_ = log_mvn_cdf(gamma_, SymMatrix(gamma_block()), opts);
}

Matrix SunParams::gamma_block() const { return omega_star_.matrix().topLeftCorner(m(), m()); }
Matrix SunParams::delta_block() const { return omega_star_.matrix().bottomLeftCorner(n(), m()); }
Matrix SunParams::omega_bar_block() const {
  return omega_star_.matrix().bottomRightCorner(n(), n());
}

double lsun_logpdf(const Vector& y, const SunParams& params, const MvnOptions& opts) {
  if (y.size() != params.n()) fail(ErrorKind::DimensionError, "lsun_logpdf: dimension mismatch");
  for (Index i = 0; i < y.size(); ++i) {
    if (!(y(i) > 0.0)) fail(ErrorKind::DomainError, "lsun_logpdf: y must be strictly positive");
  }
  const Vector z = y.array().log().matrix();
  const Vector centered = z - params.eta();
  return -z.sum() + mvn_logpdf(centered, Vector::Zero(params.n()), params.omega()) +
         log_mvn_cdf(params.gamma() + params.skew_map() * centered, params.conditional_cov(), opts) -
         params.log_normalizer();
}

SunParams to_lsun(const LcfusnParams& params) {
  const Index m = params.m();
  return assemble(params.mu(), params.sigma().matrix(), params.delta().matrix(),
                  Vector::Zero(m), Matrix::Identity(m, m));
}

SunParams conditional_as_lsun(const Vector& y2, const LcfusnParams& params,
                              const IndexSet& target) {
  const IndexSet given = complement_sorted(target, params.n());
  if (target.empty() || given.empty()) {
    fail(ErrorKind::BadPartition, "conditional_as_lsun: both blocks must be non-empty");
  }
  if (y2.size() != static_cast<Index>(given.size())) {
    fail(ErrorKind::DimensionError, "conditional_as_lsun: y2 size does not match the split");
  }
  const Matrix& sig = params.sigma().matrix();
  for (Index i : target) {
    for (Index j : given) {
      if (sig(i, j) != 0.0) {
        fail(ErrorKind::NotBlockDiagonal, "conditional_as_lsun: scale matrix is not block diagonal");
      }
    }
  }
  const Matrix& d = params.delta().matrix();
  const IndexSet all_cols = [&] {
    IndexSet c(static_cast<std::size_t>(d.cols()));
    for (Index j = 0; j < d.cols(); ++j) c[j] = j;
    return c;
  }();
  const Matrix d1 = block(d, target, all_cols);
  const Matrix d2 = block(d, given, all_cols);
  Vector mu1(static_cast<Index>(target.size())), mu2(static_cast<Index>(given.size()));
  for (std::size_t i = 0; i < target.size(); ++i) mu1(i) = params.mu()(target[i]);
  for (std::size_t i = 0; i < given.size(); ++i) mu2(i) = params.mu()(given[i]);
  for (Index i = 0; i < y2.size(); ++i) {
    if (!(y2(i) > 0.0)) fail(ErrorKind::DomainError, "conditional_as_lsun: y2 must be positive");
  }
  const Vector u2 = inv_sqrt_pd(SymMatrix(block(sig, given, given))).matrix() *
                    (y2.array().log().matrix() - mu2);
  const Index m = params.m();
  return assemble(mu1, block(sig, target, target), d1, d2.transpose() * u2,
                  Matrix::Identity(m, m) - d2.transpose() * d2);
}

}  // namespace lcfusn
