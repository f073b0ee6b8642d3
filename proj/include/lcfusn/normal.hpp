#pragma once

#include <limits>

namespace lcfusn {

class RandomStream;

/// Encodes an infinite integration/truncation bound. Any bound at or beyond
/// +kInfinity (resp. -kInfinity) is treated as +inf (resp. -inf).
inline constexpr double kInfinity = std::numeric_limits<double>::max();

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;

double norm_pdf(double x) noexcept;
double norm_cdf(double x) noexcept;
/// log Phi(x), accurate deep into the lower tail.
double log_norm_cdf(double x) noexcept;

/// Standard normal quantile; throws DomainError unless 0 < p < 1.
double norm_quantile(double p);
/// Same as norm_quantile without the domain check; p is clamped into
/// (0, 1) so the result is always finite.
double norm_quantile_unchecked(double p) noexcept;

/// Draw from N(mean, sd^2) truncated to [lower, inf). A lower bound at or
/// below -kInfinity means no truncation.
double sample_truncnorm(double mean, double sd, double lower, RandomStream& rng);

}  // namespace lcfusn
