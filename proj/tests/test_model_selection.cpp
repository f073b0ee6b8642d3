#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lcfusn/error.hpp"
#include "lcfusn/kernels.hpp"
#include "lcfusn/model_selection.hpp"
#include "lcfusn/normal.hpp"

using namespace lcfusn;
using doctest::Approx;

namespace {

Draw univariate_draw(double mu, double s2, double delta) {
  return {Vector::Constant(1, mu), SymMatrix(Matrix::Constant(1, 1, s2)), delta, 0};
}

std::vector<Draw> draw_cloud(std::size_t count, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<Draw> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(univariate_draw(0.3 + 0.05 * rng.normal(), 0.4 * std::exp(0.1 * rng.normal()),
                                  -0.3 + 0.05 * rng.normal()));
  return out;
}

DataMatrix column(std::vector<double> values) {
  Matrix y(static_cast<Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) y(static_cast<Index>(i), 0) = values[i];
  return DataMatrix(y);
}

}  // namespace

TEST_CASE("DIC arithmetic") {
  // Deviances 10, 14 and deviance 11 at the mean.
  Matrix ll(2, 1);
  ll << -5.0, -7.0;
  const DicResult r = dic(ll, -5.5);
  CHECK(r.dbar == Approx(12.0));
  CHECK(r.dhat == Approx(11.0));
  CHECK(r.p_d == Approx(1.0));
  CHECK(r.dic == Approx(13.0));
  CHECK_THROWS_AS(dic(ll.topRows(1), -5.0), Error);
  CHECK(dic(ll.topRows(1), -5.0, true).p_d == 0.0);
}

TEST_CASE("CPO arithmetic") {
  // Likelihood values 1 and 3: harmonic mean 1.5.
  Matrix ll(2, 1);
  ll << 0.0, std::log(3.0);
  const CpoResult r = cpo(ll);
  CHECK(std::exp(r.log_cpo(0)) == Approx(1.5).epsilon(1e-14));

  // Large-magnitude log-likelihoods stay finite in log space.
  Matrix big(3, 2);
  big << -1000.0, -2.0, -1001.0, -3.0, -1002.0, -4.0;
  const CpoResult b = cpo(big);
  const double naive1 = -std::log((std::exp(0.0) + std::exp(1.0) + std::exp(2.0)) / 3.0) - 1000.0;
  CHECK(b.log_cpo(0) == Approx(naive1).epsilon(1e-14));
  CHECK(b.slncpo_sum == Approx(b.log_cpo.sum()));
  CHECK(b.slncpo_mean == Approx(b.log_cpo.sum() / 2.0));

  Matrix dead(2, 1);
  dead << -1.0, -std::numeric_limits<double>::infinity();
  CHECK(cpo(dead).log_cpo(0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("DIC and CPO against naive recomputation") {
  RandomStream rng(12);
  Matrix ll(40, 7);
  for (Index i = 0; i < ll.size(); ++i) ll.data()[i] = -1.0 - 2.0 * rng.uniform();
  double dbar = 0.0;
  for (Index t = 0; t < 40; ++t) {
    double s = 0.0;
    for (Index i = 0; i < 7; ++i) s += ll(t, i);
    dbar += -2.0 * s / 40.0;
  }
  const DicResult d = dic(ll, -10.0);
  CHECK(d.dbar == Approx(dbar).epsilon(1e-12));
  CHECK(d.dic == Approx(2.0 * dbar - 20.0).epsilon(1e-12));
  const CpoResult c = cpo(ll);
  for (Index i = 0; i < 7; ++i) {
    double inv = 0.0;
    for (Index t = 0; t < 40; ++t) inv += 1.0 / std::exp(ll(t, i));
    CHECK(c.log_cpo(i) == Approx(std::log(40.0 / inv)).epsilon(1e-12));
  }
}

TEST_CASE("KS distance") {
  CHECK(ks_distance(Vector::Constant(1, 0.5)) == 0.5);
  CHECK(ks_distance(Vector::Constant(1, 0.2)) == Approx(0.8));
  Vector f(4);
  f << 0.9, 0.1, 0.4, 0.6;
  // Sorted 0.1 0.4 0.6 0.9 against steps 0, .25, .5, .75, 1.
  CHECK(ks_distance(f) == Approx(0.15));

  // Direct sup over a fine grid of the empirical-minus-uniform gap.
  RandomStream rng(3);
  Vector u(50);
  for (Index i = 0; i < 50; ++i) u(i) = rng.uniform();
  double sup = 0.0;
  for (Index i = 0; i < 50; ++i) {
    const double x = u(i);
    const auto below = std::count_if(u.begin(), u.end(), [&](double v) { return v < x; });
    const auto upto = std::count_if(u.begin(), u.end(), [&](double v) { return v <= x; });
    sup = std::max({sup, upto / 50.0 - x, x - below / 50.0});
  }
  CHECK(ks_distance(u) == sup);
}

TEST_CASE("Kolmogorov p-values") {
  // scipy.special.kolmogorov
  struct Case {
    double lambda, p;
  };
  for (const Case& c : {Case{0.5, 0.9639452436648751}, Case{0.83, 0.4961909953505036},
                        Case{1.0, 0.26999967167735456}, Case{1.36, 0.049485876755377876},
                        Case{2.0, 0.0006709252557796953}})
    CHECK(kolmogorov_pvalue(c.lambda / 10.0, 100) == Approx(c.p).epsilon(1e-10));
  CHECK(kolmogorov_pvalue(0.0, 10) == 1.0);
  CHECK(kolmogorov_pvalue(1.0, 400) == 0.0);
  CHECK_THROWS_AS(kolmogorov_pvalue(-0.1, 10), Error);
}

TEST_CASE("plug-in KS agrees with the log scale") {
  // With delta = 0 the model is log-normal, so F(y) = Phi((ln y - mu) / sigma).
  const DataMatrix y = column({0.4, 0.9, 1.1, 1.7, 2.5, 0.8, 3.3, 1.2, 0.6, 1.9, 2.2, 1.0});
  const Draw d = univariate_draw(0.1, 0.5, 0.0);
  const KsResult r = ks_plugin(y, draw_params(d, 1));
  Vector f(y.rows());
  for (Index i = 0; i < y.rows(); ++i)
    f(i) = norm_cdf((std::log(y.values()(i, 0)) - 0.1) / std::sqrt(0.5));
  CHECK(r.distance == Approx(ks_distance(f)).epsilon(1e-12));
  CHECK(r.count == 12);
  CHECK_THROWS_AS(ks_plugin(column({1.0, 2.0}), draw_params(d, 1)), Error);
  CHECK(ks_plugin(column({1.0, 2.0}), draw_params(d, 1), true).count == 2);
}

TEST_CASE("predictive probabilities") {
  const std::vector<Draw> draws = draw_cloud(200, 5);
  for (double c : {0.3, 1.0, 2.7}) {
    const PredictiveResult a = predictive_probability(draws, {c, Direction::Above}, 2);
    const PredictiveResult b = predictive_probability(draws, {c, Direction::Below}, 2);
    CHECK(a.probability + b.probability == Approx(1.0).epsilon(1e-12));
    CHECK(a.probability >= 0.0);
    CHECK(a.std_error >= 0.0);
  }
  // Point mass at a log-normal draw: P(Y > median) = 1/2.
  const std::vector<Draw> point{univariate_draw(0.7, 0.3, 0.0)};
  const PredictiveResult half =
      predictive_probability(point, {std::exp(0.7), Direction::Above}, 1, true);
  CHECK(half.probability == Approx(0.5).epsilon(1e-12));
  CHECK(half.std_error == 0.0);
  CHECK_THROWS_AS(predictive_probability(point, {1.0, Direction::Above}, 1), Error);
  CHECK_THROWS_AS(predictive_probability(draws, {-1.0, Direction::Above}, 2), Error);
}

TEST_CASE("comparison report") {
  const DataMatrix y = column({0.7, 1.3, 2.2, 3.1, 0.45, 1.8, 0.9, 1.1, 2.6, 0.5, 1.4});
  const std::vector<Draw> draws = draw_cloud(300, 7);
  const ComparisonReport r = compare_fit(y, draws, 2, {{1.0, Direction::Above}}, 100);
  CHECK(r.m == 2);
  const Matrix ll = loglik_matrix(y, subsample(draws, 100), 2);
  CHECK(r.cpo.slncpo_sum == Approx(cpo(ll).slncpo_sum).epsilon(1e-12));
  REQUIRE(r.ks.has_value());
  CHECK(r.ks->count == 11);
  CHECK(r.predictive.size() == 1);
  CHECK(std::isfinite(r.dic.dic));

  const std::vector<Draw> sub = subsample(draws, 100);
  CHECK(sub.size() == 100);
  CHECK(sub.front().delta == draws.front().delta);
  CHECK(subsample(draws, 1000).size() == 300);

  const Draw mean = posterior_mean({univariate_draw(1.0, 0.2, 0.1), univariate_draw(2.0, 0.4, 0.3)});
  CHECK(mean.mu(0) == Approx(1.5));
  CHECK(mean.sigma(0, 0) == Approx(0.3));
  CHECK(mean.delta == Approx(0.2));
}
