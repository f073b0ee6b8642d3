#pragma once

#include "lcfusn/distributions.hpp"

namespace lcfusn {

/// Parameters of the log-SUN family.
///
/// Omega_star is (m+n) x (m+n), partitioned as [[Gamma, Delta'], [Delta, OmegaBar]]
/// with Gamma m x m and OmegaBar n x n. Omega_star must be positive definite
/// and OmegaBar must have a unit diagonal. Gamma is only required to be
/// positive definite: conditionals of the log-CFUSN family land here with
/// Gamma = I - Delta_2' Delta_2.
class SunParams {
 public:
  SunParams(Vector eta, Vector gamma, Vector omega_bar, SymMatrix omega_star,
            const MvnOptions& opts = {});

  Index n() const noexcept { return eta_.size(); }
  Index m() const noexcept { return gamma_.size(); }
  const Vector& eta() const noexcept { return eta_; }
  const Vector& gamma() const noexcept { return gamma_; }
  const Vector& omega_bar() const noexcept { return omega_bar_; }
  const SymMatrix& omega_star() const noexcept { return omega_star_; }

  Matrix gamma_block() const;
  Matrix delta_block() const;
  Matrix omega_bar_block() const;

  /// Omega = omega OmegaBar omega.
  const SymMatrix& omega() const noexcept { return omega_; }
  /// Delta' OmegaBar^{-1} omega^{-1}, the m x n map applied to (z - eta).
  const Matrix& skew_map() const noexcept { return skew_map_; }
  /// Gamma - Delta' OmegaBar^{-1} Delta.
  const SymMatrix& conditional_cov() const noexcept { return conditional_cov_; }
  /// log Phi_m(gamma | Gamma), cached at construction.
  double log_normalizer() const noexcept { return log_normalizer_; }

 private:
  Vector eta_;
  Vector gamma_;
  Vector omega_bar_;
  SymMatrix omega_star_;
  SymMatrix omega_;
  Matrix skew_map_;
  SymMatrix conditional_cov_;
  double log_normalizer_ = 0.0;
};

double lsun_logpdf(const Vector& y, const SunParams& params, const MvnOptions& opts = {});

/// log-CFUSN(mu, Sigma, Delta) written as a log-SUN member:
/// eta = mu, gamma = 0, omega_bar = sqrt(diag Sigma), OmegaBar = corr(Sigma),
/// Delta_sun = omega^{-1} Sigma^{1/2} Delta, Gamma = I_m.
SunParams to_lsun(const LcfusnParams& params);

/// The law of Y1 | Y2 = y2 as a log-SUN member (same split convention as
/// conditional_logpdf): gamma = Delta_2' Sigma_22^{-1/2}(ln y2 - mu_2),
/// Gamma = I_m - Delta_2' Delta_2.
SunParams conditional_as_lsun(const Vector& y2, const LcfusnParams& params,
                              const IndexSet& target);

}  // namespace lcfusn
