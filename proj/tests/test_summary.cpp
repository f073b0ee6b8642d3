#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lcfusn/error.hpp"
#include "lcfusn/normal.hpp"
#include "lcfusn/random.hpp"
#include "lcfusn/summary.hpp"

using namespace lcfusn;
using doctest::Approx;
using Eigen::Index;

namespace {

Vector normal_draws(Index count, std::uint64_t seed) {
  RandomStream rng(seed);
  Vector v(count);
  for (Index i = 0; i < count; ++i) v(i) = rng.normal();
  return v;
}

// AR(1) with unit marginal variance.
Vector ar1(Index count, double phi, std::uint64_t seed) {
  RandomStream rng(seed);
  Vector v(count);
  double x = rng.normal();
  const double s = std::sqrt(1.0 - phi * phi);
  for (Index i = 0; i < count; ++i) {
    x = phi * x + s * rng.normal();
    v(i) = x;
  }
  return v;
}

}  // namespace

TEST_CASE("HPD of a normal sample") {
  const Interval hpd = hpd_interval(normal_draws(200000, 1));
  CHECK(hpd.lower == Approx(-1.96).epsilon(0.02));
  CHECK(hpd.upper == Approx(1.96).epsilon(0.02));
}

TEST_CASE("HPD of a skewed sample hugs the mode") {
  RandomStream rng(2);
  Vector v(100000);
  for (Index i = 0; i < v.size(); ++i) v(i) = rng.exponential();
  const Interval hpd = hpd_interval(v);
  CHECK(hpd.lower < 0.01);
  CHECK(hpd.upper == Approx(-std::log(0.05)).epsilon(0.03));
  // Shorter than the equal-tailed interval.
  CHECK(hpd.upper - hpd.lower < quantile(v, 0.975) - quantile(v, 0.025));
}

TEST_CASE("HPD contains the right number of draws") {
  Vector v(200);
  for (Index i = 0; i < 200; ++i) v(i) = static_cast<double>((i * 37) % 200);
  const Interval hpd = hpd_interval(v, 0.9);
  const auto inside = std::count_if(v.begin(), v.end(), [&](double x) {
    return x >= hpd.lower && x <= hpd.upper;
  });
  CHECK(inside == 180);
  CHECK(hpd.upper - hpd.lower == 179.0);
}

TEST_CASE("constant chains") {
  const Vector v = Vector::Constant(500, 2.5);
  const Interval hpd = hpd_interval(v);
  CHECK(hpd.lower == 2.5);
  CHECK(hpd.upper == 2.5);
  const ParameterSummary s = summarize(v);
  CHECK(s.sd == 0.0);
  CHECK(s.median == 2.5);
  CHECK(std::isfinite(s.ess));
  CHECK(s.ess <= 500.0);
}

TEST_CASE("quantiles are type 7") {
  Vector v(5);
  v << 3, 1, 4, 1, 5;
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 5.0);
  CHECK(quantile(v, 0.5) == 3.0);
  CHECK(quantile(v, 0.1) == Approx(1.0));
  CHECK(quantile(v, 0.9) == Approx(4.6));
}

TEST_CASE("effective sample size") {
  const double iid = effective_sample_size(normal_draws(20000, 3));
  CHECK(iid == Approx(20000).epsilon(0.1));
  CHECK(iid <= 20000.0 * 1.0001);
  // AR(1): ESS ~ T (1 - phi) / (1 + phi).
  const double phi = 0.9;
  const double ess = effective_sample_size(ar1(100000, phi, 4));
  CHECK(ess == Approx(100000 * (1 - phi) / (1 + phi)).epsilon(0.15));
}

TEST_CASE("split R-hat") {
  std::vector<Vector> good{normal_draws(4000, 5), normal_draws(4000, 6)};
  CHECK(split_rhat(good) == Approx(1.0).epsilon(0.01));
  Vector shifted = normal_draws(4000, 7).array() + 3.0;
  std::vector<Vector> bad{normal_draws(4000, 8), shifted};
  CHECK(split_rhat(bad) > 1.5);
  // A trending single chain is caught by the split.
  Vector trend(4000);
  for (Index i = 0; i < 4000; ++i) trend(i) = static_cast<double>(i) / 400.0;
  CHECK(split_rhat({trend}) > 1.5);
}

TEST_CASE("summaries") {
  const Vector v = normal_draws(10000, 9).array() * 2.0 + 1.0;
  const ParameterSummary s = summarize(v);
  CHECK(s.mean == Approx(1.0).epsilon(0.05));
  CHECK(s.sd == Approx(2.0).epsilon(0.03));
  CHECK(s.q025 < s.median);
  CHECK(s.median < s.q975);
  CHECK(s.hpd.lower <= s.median);
  CHECK(s.median <= s.hpd.upper);
  CHECK(s.ess <= 10000.0);

  const ParameterSummary p = summarize(std::vector<Vector>{v.head(5000), v.tail(5000)});
  CHECK(p.mean == Approx(s.mean).epsilon(1e-12));
  CHECK(p.rhat == Approx(1.0).epsilon(0.02));

  CHECK_THROWS_AS(summarize(Vector(Vector::Zero(50))), Error);
}
