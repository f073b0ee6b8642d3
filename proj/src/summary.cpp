#include "lcfusn/summary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcfusn/error.hpp"

namespace lcfusn {

namespace {

void require_draws(Eigen::Index count) {
  if (count < kMinSummaryDraws)
    fail(ErrorKind::TooFewDraws, "need at least " + std::to_string(kMinSummaryDraws) +
                                     " draws, got " + std::to_string(count));
}

void require_finite(const Vector& v) {
  if (!all_finite(v)) fail(ErrorKind::NonFinite, "draws contain non-finite values");
}

std::vector<double> sorted(const Vector& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return s;
}

double quantile_sorted(const std::vector<double>& s, double p) {
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

Vector concat(const std::vector<Vector>& chains) {
  Eigen::Index total = 0;
  for (const auto& c : chains) total += c.size();
  Vector all(total);
  Eigen::Index at = 0;
  for (const auto& c : chains) {
    all.segment(at, c.size()) = c;
    at += c.size();
  }
  return all;
}

}  // namespace

Interval hpd_interval(const Vector& draws, double level) {
  require_draws(draws.size());
  require_finite(draws);
  if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::DomainError, "level must lie in (0, 1)");
  const auto s = sorted(draws);
  const std::size_t t = s.size();
  const auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(t)));
  std::size_t best = 0;
  double width = s[k - 1] - s[0];
  for (std::size_t i = 1; i + k - 1 < t; ++i) {
    const double w = s[i + k - 1] - s[i];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {s[best], s[best + k - 1]};
}

double quantile(const Vector& draws, double p) {
  if (draws.size() == 0) fail(ErrorKind::TooFewDraws, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::DomainError, "probability must lie in [0, 1]");
  return quantile_sorted(sorted(draws), p);
}

double effective_sample_size(const Vector& draws) {
  const Eigen::Index t = draws.size();
  if (t < 4) fail(ErrorKind::TooFewDraws, "ESS needs at least 4 draws");
  require_finite(draws);
  const Vector x = draws.array() - draws.mean();
  const double c0 = x.squaredNorm() / static_cast<double>(t);
  if (c0 <= 0.0) return static_cast<double>(t);

  auto rho = [&](Eigen::Index lag) {
    return x.head(t - lag).dot(x.tail(t - lag)) / static_cast<double>(t) / c0;
  };
  // Pairs Gamma_k = rho(2k) + rho(2k+1) must stay positive and are forced
  // to be non-increasing.
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; 2 * k + 1 < t; ++k) {
    double gamma = rho(2 * k) + rho(2 * k + 1);
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, prev);
    prev = gamma;
    sum += gamma;
  }
  // Antithetic chains can give tau < 1; the reported ESS is capped at T.
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0);
  return static_cast<double>(t) / tau;
}

double split_rhat(const std::vector<Vector>& chains) {
  if (chains.empty()) fail(ErrorKind::TooFewDraws, "R-hat needs at least one chain");
  Eigen::Index half = chains.front().size() / 2;
  for (const auto& c : chains) half = std::min(half, c.size() / 2);
  if (half < 2) fail(ErrorKind::TooFewDraws, "R-hat needs at least 4 draws per chain");

  std::vector<Vector> parts;
  for (const auto& c : chains) {
    require_finite(c);
    parts.emplace_back(c.head(half));
    parts.emplace_back(c.segment(c.size() - half, half));
  }
  const auto k = static_cast<double>(parts.size());
  const auto n = static_cast<double>(half);
  Vector means(parts.size());
  double w = 0.0;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    means[static_cast<Eigen::Index>(j)] = parts[j].mean();
    w += (parts[j].array() - parts[j].mean()).square().sum() / (n - 1.0);
  }
  w /= k;
  const double b = n * (means.array() - means.mean()).square().sum() / (k - 1.0);
  if (w <= 0.0) return b <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

ParameterSummary summarize(const Vector& draws, double level) {
  return summarize(std::vector<Vector>{draws}, level);
}

ParameterSummary summarize(const std::vector<Vector>& chains, double level) {
  const Vector all = concat(chains);
  require_draws(all.size());
  require_finite(all);
  ParameterSummary s;
  s.mean = all.mean();
  s.sd = std::sqrt((all.array() - s.mean).square().sum() / static_cast<double>(all.size() - 1));
  const auto sorted_all = sorted(all);
  s.q025 = quantile_sorted(sorted_all, 0.025);
  s.median = quantile_sorted(sorted_all, 0.5);
  s.q975 = quantile_sorted(sorted_all, 0.975);
  s.hpd = hpd_interval(all, level);
  s.ess = 0.0;
  for (const auto& c : chains) s.ess += effective_sample_size(c);
  s.rhat = split_rhat(chains);
  return s;
}

}  // namespace lcfusn
