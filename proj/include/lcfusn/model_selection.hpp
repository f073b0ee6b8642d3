#pragma once

#include <optional>
#include <vector>

#include "lcfusn/inference.hpp"

namespace lcfusn {

struct DicResult {
  double dbar;  // posterior mean deviance
  double dhat;  // deviance at the posterior mean
  double p_d;
  double dic;
};

/// `loglik` is T x L (draw x observation). Needs T >= 2 unless
/// allow_single_draw, in which case T = 1 gives p_D = 0.
DicResult dic(const Matrix& loglik, double loglik_at_mean, bool allow_single_draw = false);

struct CpoResult {
  Vector log_cpo;
  double slncpo_sum;
  /// Per-observation mean of ln CPO.
  double slncpo_mean;
};

/// Harmonic-mean CPO in log space. An observation with -inf log-likelihood
/// at some draw gets ln CPO = -inf.
CpoResult cpo(const Matrix& loglik);

/// Componentwise posterior mean of (mu, Sigma, delta).
Draw posterior_mean(const std::vector<Draw>& draws);

enum class Direction { Above, Below };

struct PredictiveQuery {
  double threshold;
  Direction direction;
};

struct PredictiveResult {
  double threshold;
  Direction direction;
  double probability;
  /// Naive standard error of the draw average.
  double std_error;
};

/// Rao-Blackwellized P(Y > c) or P(Y < c) for n = 1. Needs 100 draws unless
/// allow_few_draws.
PredictiveResult predictive_probability(const std::vector<Draw>& draws, PredictiveQuery query,
                                        Index m, bool allow_few_draws = false);

/// Largest gap between the empirical cdf and model cdf values evaluated at
/// the observations: max_i max(i/L - F_(i), F_(i) - (i-1)/L).
double ks_distance(const Vector& model_cdf_at_obs);

/// Asymptotic Kolmogorov tail P(K > sqrt(L) D), 100 series terms.
double kolmogorov_pvalue(double distance, Index count);

struct KsResult {
  double distance;
  double p_value;
  Index count;
};

/// Plug-in KS test for n = 1 data. Needs L >= 10 unless allow_small.
KsResult ks_plugin(const DataMatrix& data, const LcfusnParams& params,
                   bool allow_small = false);

struct ComparisonReport {
  Index m = 0;
  DicResult dic{};
  CpoResult cpo;
  std::optional<KsResult> ks;
  std::vector<PredictiveResult> predictive;
};

/// DIC, CPO, and for n = 1 the KS test and predictive probabilities.
/// Uses at most `max_draws` evenly spaced draws for the likelihood matrix.
ComparisonReport compare_fit(const DataMatrix& data, const std::vector<Draw>& draws, Index m,
                             const std::vector<PredictiveQuery>& queries = {},
                             std::size_t max_draws = 1000);

/// Evenly spaced subset of at most `count` draws, in order.
std::vector<Draw> subsample(const std::vector<Draw>& draws, std::size_t count);

}  // namespace lcfusn
