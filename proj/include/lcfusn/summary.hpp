#pragma once

#include <string>
#include <vector>

#include "lcfusn/linalg.hpp"

namespace lcfusn {

/// Summaries below need at least this many draws (TooFewDraws otherwise).
inline constexpr Eigen::Index kMinSummaryDraws = 100;

struct Interval {
  double lower;
  double upper;
};

/// Shortest interval containing ceil(level * T) sorted draws.
Interval hpd_interval(const Vector& draws, double level = 0.95);

/// Type-7 sample quantile.
double quantile(const Vector& draws, double p);

/// Effective sample size from the autocorrelation sum truncated by Geyer's
/// initial monotone sequence, capped at the number of draws.
double effective_sample_size(const Vector& draws);

/// Split R-hat: every chain is halved and the halves treated as chains.
double split_rhat(const std::vector<Vector>& chains);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double median = 0.0;
  double q975 = 0.0;
  Interval hpd{0.0, 0.0};
  double ess = 0.0;
  double rhat = 1.0;
};

ParameterSummary summarize(const Vector& draws, double level = 0.95);

/// Pools the chains for the moments, quantiles and HPD; ESS is summed over
/// chains and R-hat is the split statistic.
ParameterSummary summarize(const std::vector<Vector>& chains, double level = 0.95);

}  // namespace lcfusn
