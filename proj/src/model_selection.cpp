#include "lcfusn/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lcfusn/error.hpp"
#include "lcfusn/kernels.hpp"
#include "lcfusn/normal.hpp"

namespace lcfusn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_loglik(const Matrix& loglik, Index min_draws) {
  if (loglik.rows() < min_draws || loglik.cols() < 1)
    fail(ErrorKind::TooFewDraws, "log-likelihood matrix needs at least " +
                                     std::to_string(min_draws) + " draws and one observation");
  for (Index i = 0; i < loglik.size(); ++i) {
    const double v = loglik.data()[i];
    if (std::isnan(v) || v == kInf)
      fail(ErrorKind::NonFinite, "log-likelihood matrix has NaN or +inf entries");
  }
}

}  // namespace

DicResult dic(const Matrix& loglik, double loglik_at_mean, bool allow_single_draw) {
  require_loglik(loglik, allow_single_draw ? 1 : 2);
  if (!std::isfinite(loglik_at_mean))
    fail(ErrorKind::NonFinite, "log-likelihood at the posterior mean is not finite");
  DicResult r{};
  r.dbar = -2.0 * loglik.rowwise().sum().mean();
  r.dhat = -2.0 * loglik_at_mean;
  if (!std::isfinite(r.dbar)) fail(ErrorKind::NonFinite, "mean deviance is not finite");
  r.p_d = loglik.rows() == 1 ? 0.0 : r.dbar - r.dhat;
  r.dic = r.dbar + r.p_d;
  return r;
}

CpoResult cpo(const Matrix& loglik) {
  require_loglik(loglik, 2);
  const Index t = loglik.rows();
  CpoResult r;
  r.log_cpo.resize(loglik.cols());
  for (Index i = 0; i < loglik.cols(); ++i) {
    const Vector neg = -loglik.col(i);
    const double top = neg.maxCoeff();
    if (top == kInf) {
      r.log_cpo[i] = -kInf;
      continue;
    }
    const double lse = top + std::log((neg.array() - top).exp().sum());
    r.log_cpo[i] = std::log(static_cast<double>(t)) - lse;
  }
  r.slncpo_sum = r.log_cpo.sum();
  r.slncpo_mean = r.slncpo_sum / static_cast<double>(loglik.cols());
  return r;
}

Draw posterior_mean(const std::vector<Draw>& draws) {
  if (draws.empty()) fail(ErrorKind::TooFewDraws, "posterior mean of no draws");
  const Index n = draws.front().mu.size();
  Vector mu = Vector::Zero(n);
  Matrix sigma = Matrix::Zero(n, n);
  double delta = 0.0;
  for (const auto& d : draws) {
    mu += d.mu;
    sigma += d.sigma.matrix();
    delta += d.delta;
  }
  const auto t = static_cast<double>(draws.size());
  return {mu / t, SymMatrix(sigma / t), delta / t, 0};
}

PredictiveResult predictive_probability(const std::vector<Draw>& draws, PredictiveQuery query,
                                        Index m, bool allow_few_draws) {
  if (draws.empty() || (!allow_few_draws && static_cast<Index>(draws.size()) < 100))
    fail(ErrorKind::TooFewDraws, "predictive probabilities need at least 100 draws");
  if (draws.front().mu.size() != 1)
    fail(ErrorKind::DimensionError, "predictive probabilities are univariate");
  if (!(query.threshold > 0.0)) fail(ErrorKind::DomainError, "threshold must be positive");
  Vector p(static_cast<Index>(draws.size()));
  for (std::size_t t = 0; t < draws.size(); ++t) {
    double below = 1.0;
    if (query.threshold < kInfinity)
      below = lcfusn_cdf(Vector::Constant(1, query.threshold), draw_params(draws[t], m)).value;
    p[static_cast<Index>(t)] = query.direction == Direction::Above ? 1.0 - below : below;
  }
  const double mean = p.mean();
  const double var = p.size() > 1 ? (p.array() - mean).square().sum() / (p.size() - 1.0) : 0.0;
  return {query.threshold, query.direction, mean, std::sqrt(var / static_cast<double>(p.size()))};
}

double ks_distance(const Vector& model_cdf_at_obs) {
  const Index count = model_cdf_at_obs.size();
  if (count == 0) fail(ErrorKind::TooFewDraws, "KS distance of an empty sample");
  std::vector<double> f(model_cdf_at_obs.data(), model_cdf_at_obs.data() + count);
  std::sort(f.begin(), f.end());
  const auto l = static_cast<double>(count);
  double d = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double k = static_cast<double>(i);
    d = std::max({d, (k + 1.0) / l - f[i], f[i] - k / l});
  }
  return d;
}

double kolmogorov_pvalue(double distance, Index count) {
  if (!(distance >= 0.0) || count < 1) fail(ErrorKind::DomainError, "invalid KS arguments");
  const double lambda = std::sqrt(static_cast<double>(count)) * distance;
  constexpr int kTerms = 100;
  if (lambda < 1.0) {
    // Small argument: cdf series sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)).
    if (lambda < 1e-3) return 1.0;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double tail = 0.0;
  for (int k = 1; k <= kTerms; ++k)
    tail += (k % 2 == 1 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(tail, 0.0, 1.0);
}

KsResult ks_plugin(const DataMatrix& data, const LcfusnParams& params, bool allow_small) {
  if (data.dim() != 1 || params.n() != 1)
    fail(ErrorKind::DimensionError, "the KS test is univariate");
  if (data.rows() < 1 || (!allow_small && data.rows() < 10))
    fail(ErrorKind::TooFewDraws, "the KS test needs at least 10 observations");
  Vector f(data.rows());
  for (Index i = 0; i < data.rows(); ++i)
    f[i] = lcfusn_cdf(data.values().row(i).transpose(), params).value;
  const double d = ks_distance(f);
  return {d, kolmogorov_pvalue(d, data.rows()), data.rows()};
}

std::vector<Draw> subsample(const std::vector<Draw>& draws, std::size_t count) {
  if (count == 0 || draws.size() <= count) return draws;
  std::vector<Draw> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(draws[k * draws.size() / count]);
  return out;
}

ComparisonReport compare_fit(const DataMatrix& data, const std::vector<Draw>& draws, Index m,
                             const std::vector<PredictiveQuery>& queries, std::size_t max_draws) {
  if (data.rows() == 0) fail(ErrorKind::EmptyFile, "model comparison needs data");
  const std::vector<Draw> used = subsample(draws, max_draws);
  ComparisonReport r;
  r.m = m;
  const Matrix ll = loglik_matrix(data, used, m);
  const Draw mean = posterior_mean(draws);
  r.dic = dic(ll, loglik(data, mean.mu, mean.sigma, mean.delta, m));
  r.cpo = cpo(ll);
  if (data.dim() == 1) {
    if (data.rows() >= 10) r.ks = ks_plugin(data, draw_params(mean, m));
    for (const auto& q : queries) r.predictive.push_back(predictive_probability(used, q, m, true));
  }
  return r;
}

}  // namespace lcfusn
