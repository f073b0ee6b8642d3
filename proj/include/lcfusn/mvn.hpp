#pragma once

#include "lcfusn/linalg.hpp"
#include "lcfusn/random.hpp"

namespace lcfusn {

/// Outcome of a multivariate normal cdf evaluation.
struct CdfResult {
  double value = 0.0;
  /// Three standard errors across randomized lattice shifts (closed forms
  /// report their rounding-level accuracy).
  double error_estimate = 0.0;
  long points_used = 0;
  /// False when error_estimate still exceeded the tolerance at max_points;
  /// value is then the best estimate available.
  bool converged = true;
};

inline constexpr int kMaxMvnDim = 12;
/// Absolute tolerance for cdf factors inside density evaluation.
inline constexpr double kDensityTol = 1e-7;
/// Absolute tolerance for cdf factors inside MCMC loops.
inline constexpr double kMcmcTol = 1e-6;

struct MvnOptions {
  double tol = kDensityTol;
  long max_points = 4'000'000;
  int shifts = 12;
};

/// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.
double bvn_cdf(double h, double k, double rho) noexcept;

/// P(Z <= upper) for Z ~ N(0, cov).
///
/// Bounds at +kInfinity are integrated out analytically and a bound at
/// -kInfinity yields 0. One and two remaining dimensions use closed forms;
/// three and four condition on one coordinate and integrate the lower
/// dimensional cdf with adaptive Gauss-Kronrod (deterministic, ~1e-12);
/// five or more use separation of variables with variable prioritization
/// and randomized Richtmyer lattice rules (baker-transformed, antithetic),
/// doubling the lattice until the error estimate meets `opts.tol`.
CdfResult mvn_cdf(const Vector& upper, const SymMatrix& cov, const MvnOptions& opts,
                  RandomStream& rng);

/// Deterministic variant: uses a fixed internal stream, so the same inputs
/// always produce the same value. Used by the density code.
CdfResult mvn_cdf(const Vector& upper, const SymMatrix& cov, const MvnOptions& opts = {});

double mvn_logpdf(const Vector& x, const Vector& mean, const SymMatrix& cov);

}  // namespace lcfusn
