#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lcfusn/error.hpp"
#include "lcfusn/inference.hpp"

using namespace lcfusn;
using doctest::Approx;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Usage;
}

DataMatrix column(std::initializer_list<double> values) {
  Matrix y(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) y(i++, 0) = v;
  return DataMatrix(y);
}

SymMatrix scalar(double v) { return SymMatrix(Matrix::Constant(1, 1, v)); }

ChainState univariate_state(double mu, double s2, double delta, Matrix latent) {
  ChainState st;
  st.mu = Vector::Constant(1, mu);
  st.sigma = scalar(s2);
  st.delta = delta;
  st.latent = std::move(latent);
  return st;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("data matrix rejects non-positive observations") {
  CHECK(kind_of([] { column({1.0, 0.0}); }) == ErrorKind::NonPositiveValue);
  CHECK(kind_of([] { column({-2.0}); }) == ErrorKind::NonPositiveValue);
  CHECK(kind_of([] { column({1.0, std::nan("")}); }) == ErrorKind::NonPositiveValue);
  try {
    Matrix y = Matrix::Ones(3, 2);
    y(2, 1) = -1.0;
    DataMatrix d(y);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  const DataMatrix d = column({std::exp(1.0), 1.0});
  CHECK(d.log_values()(0, 0) == Approx(1.0));
  CHECK(d.log_values()(1, 0) == 0.0);
  CHECK(DataMatrix::empty(3).rows() == 0);
  CHECK(DataMatrix::empty(3).dim() == 3);
}

TEST_CASE("prior specification") {
  const PriorSpec p = PriorSpec::univariate(0.5, 4.0, 3.0, 2.0);
  CHECK(p.d == 6.0);
  CHECK(p.D(0, 0) == 4.0);
  CHECK(p.alpha() == 3.0);
  CHECK(p.beta() == 2.0);
  CHECK(kind_of([] { PriorSpec::univariate(0.0, -1.0, 1.0, 1.0); }) == ErrorKind::DomainError);
  CHECK(kind_of([] { PriorSpec::univariate(0.0, 1.0, 0.0, 1.0); }) == ErrorKind::DomainError);
  CHECK(kind_of([] {
          PriorSpec::multivariate(Vector::Zero(2), SymMatrix(Matrix::Identity(2, 2)), 2.0,
                                  SymMatrix(Matrix::Identity(2, 2)));
        }) == ErrorKind::DomainError);
  CHECK(kind_of([] {
          PriorSpec::multivariate(Vector::Zero(2), SymMatrix(Matrix::Identity(3, 3)), 4.0,
                                  SymMatrix(Matrix::Identity(2, 2)));
        }) == ErrorKind::DimensionError);
}

TEST_CASE("delta support and configuration checks") {
  CHECK(delta_bound(1, 2) == Approx(1.0 / std::sqrt(2.0) - kDeltaMargin).epsilon(1e-14));
  CHECK(delta_bound(2, 3) == Approx(1.0 / std::sqrt(6.0) - kDeltaMargin).epsilon(1e-14));
  ChainConfig c;
  c.burnin = c.iterations;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Usage);
  c = ChainConfig{};
  c.thin = 0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Usage);
  c = ChainConfig{};
  c.adapt_until = c.burnin + 1;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Usage);
}

TEST_CASE("log-likelihood values") {
  // Standard log-normal at y = 1.
  CHECK(loglik(column({1.0}), Vector::Zero(1), scalar(1.0), 0.0, 1) ==
        Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
  // scipy quadrature oracle.
  const DataMatrix y = column({0.7, 1.3, 2.2, 3.1, 0.45});
  CHECK(loglik(y, Vector::Constant(1, 0.2), scalar(0.5), -0.3, 2) ==
        Approx(-7.107227918021519).epsilon(1e-9));
  CHECK(kind_of([&] { loglik(y, Vector::Zero(1), scalar(1.0), 0.8, 2); }) ==
        ErrorKind::InvalidSkewness);
}

TEST_CASE("mu update matches its Gaussian full conditional") {
  const DataMatrix y = column({0.7, 1.3, 2.2, 3.1, 0.45, 1.8});
  Matrix latent(6, 2);
  latent << 0.1, 0.5, 1.2, 0.3, 0.8, 0.9, 0.05, 2.0, 0.6, 0.6, 1.5, 0.2;
  const double s2 = 0.4, delta = -0.35, m = 2.0, v = 2.0, mu0 = 0.3;
  const ChainState st = univariate_state(0.0, s2, delta, latent);
  const PriorSpec prior = PriorSpec::univariate(mu0, v, 2.0, 1.0);

  const double b = delta * std::sqrt(s2);
  const double c = s2 * (1.0 - m * delta * delta);
  double resid = 0.0;
  for (Index i = 0; i < 6; ++i) resid += std::log(y.values()(i, 0)) - b * latent.row(i).sum();
  const double prec = 1.0 / v + 6.0 / c;
  const double mean = (mu0 / v + resid / c) / prec;

  RandomStream rng(5);
  std::vector<double> draws;
  for (int k = 0; k < 40000; ++k) draws.push_back(update_mu(st, y, prior, rng)(0));
  CHECK(std::abs(mean_of(draws) - mean) < 4.0 * std::sqrt(1.0 / prec / 40000.0));
  CHECK(var_of(draws) == Approx(1.0 / prec).epsilon(0.03));
}

TEST_CASE("latents are half-normal when delta is zero") {
  Matrix y = Matrix::Constant(3000, 1, 1.5);
  const DataMatrix data(y);
  const ChainState st = univariate_state(0.1, 0.3, 0.0, Matrix::Ones(3000, 2));
  RandomStream rng(11);
  const Matrix x = update_latents(st, data, rng);
  CHECK((x.array() >= 0.0).all());
  CHECK(x.mean() == Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(0.02));
  CHECK(x.array().square().mean() == Approx(1.0).epsilon(0.04));
}

TEST_CASE("latent conditional follows the truncated normal form") {
  // One observation, m = 1: |X| | y ~ N(g / (1 + c), 1 / (1 + c)) truncated at 0.
  const double s2 = 0.5, delta = 0.6, mu = 0.2, z = 1.1;
  const DataMatrix y = column({std::exp(z)});
  const ChainState st = univariate_state(mu, s2, delta, Matrix::Ones(1, 1));
  const double b = delta * std::sqrt(s2), cv = s2 * (1.0 - delta * delta);
  const double c = b * b / cv, g = b * (z - mu) / cv;
  const double loc = g / (1.0 + c), sd = 1.0 / std::sqrt(1.0 + c);
  const double a = -loc / sd;
  const double lambda = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi) /
                        (0.5 * std::erfc(a / std::sqrt(2.0)));
  RandomStream rng(3);
  std::vector<double> draws;
  for (int k = 0; k < 40000; ++k) draws.push_back(update_latents(st, y, rng)(0, 0));
  CHECK(mean_of(draws) == Approx(loc + sd * lambda).epsilon(0.01));
}

TEST_CASE("Metropolis moves stay on the support") {
  RandomStream gen(21);
  const AugmentedSample sim =
      simulate_augmented(Vector::Constant(1, 1.0), scalar(0.16), -0.6, 2, 50, gen);
  const PriorSpec prior = PriorSpec::univariate(0.0, 100.0, 0.01, 0.01);
  ChainState st = univariate_state(1.0, 0.16, 0.69, sim.latent);
  RandomStream rng(4);
  for (int k = 0; k < 500; ++k) {
    for (MuHandling mode : {MuHandling::Conditional, MuHandling::Integrated}) {
      st.delta = update_delta(st, sim.data, prior, 0.5, rng, mode).delta;
      st.sigma = update_sigma(st, sim.data, prior, 0.5, rng, mode).sigma;
      ExpansionMove e = update_expansion(st, sim.data, prior, 0.5, rng, mode);
      st.delta = e.delta;
      st.latent = e.latent;
      st.latent = update_latents(st, sim.data, rng);
      REQUIRE_NOTHROW(st.check(2));
      REQUIRE(std::abs(st.delta) <= delta_bound(1, 2));
    }
  }
}

TEST_CASE("retained draw bookkeeping") {
  const DataMatrix y = column({0.7, 1.3, 2.2});
  const PriorSpec prior = PriorSpec::univariate(0.0, 10.0, 2.0, 1.0);
  ChainConfig c;
  c.n_chains = 1;
  c.adapt_until = 0;
  struct Case {
    long iterations, burnin, thin;
    std::size_t expected;
  };
  for (const Case& k : {Case{11, 10, 1, 1}, Case{100, 0, 1, 100}, Case{100, 20, 5, 16},
                        Case{101, 20, 5, 16}}) {
    c.iterations = k.iterations;
    c.burnin = k.burnin;
    c.thin = k.thin;
    const ChainRun run = run_chain(y, prior, c, 1);
    CHECK(run.chains[0].draws.size() == k.expected);
    CHECK(run.chains[0].draws.back().iteration ==
          k.burnin + static_cast<long>(k.expected) * k.thin);
  }
  const std::vector<std::string> names = parameter_names(2);
  CHECK(names == std::vector<std::string>{"mu_1", "mu_2", "sigma_1_1", "sigma_1_2",
                                          "sigma_2_2", "delta"});
}

TEST_CASE("chains are reproducible from the seed") {
  RandomStream gen(8);
  const AugmentedSample sim =
      simulate_augmented(Vector::Constant(1, 0.5), scalar(0.3), 0.4, 2, 40, gen);
  const PriorSpec prior = PriorSpec::univariate(0.0, 100.0, 0.01, 0.01);
  ChainConfig c;
  c.iterations = 600;
  c.burnin = 100;
  c.adapt_until = 100;
  c.thin = 2;
  const Matrix a = flatten(run_chain(sim.data, prior, c, 2).chains[1], 1);
  const Matrix b = flatten(run_chain(sim.data, prior, c, 2).chains[1], 1);
  CHECK(a == b);
  c.seed += 1;
  const Matrix d = flatten(run_chain(sim.data, prior, c, 2).chains[1], 1);
  CHECK(a != d);
}

TEST_CASE("bivariate chain runs and keeps Sigma positive definite") {
  Matrix s(2, 2);
  s << 0.3, 0.1, 0.1, 0.4;
  RandomStream gen(12);
  const AugmentedSample sim =
      simulate_augmented(Vector::Constant(2, 0.2), SymMatrix(s), 0.3, 1, 60, gen);
  const PriorSpec prior = PriorSpec::multivariate(Vector::Zero(2), SymMatrix(100.0 * Matrix::Identity(2, 2)),
                                                  3.0, SymMatrix(0.01 * Matrix::Identity(2, 2)));
  ChainConfig c;
  c.iterations = 2000;
  c.burnin = 500;
  c.adapt_until = 500;
  c.n_chains = 1;
  const ChainRun run = run_chain(sim.data, prior, c, 1);
  CHECK(run.names.size() == 6);
  for (const Draw& d : run.chains[0].draws) {
    CHECK(d.sigma(0, 0) * d.sigma(1, 1) > d.sigma(0, 1) * d.sigma(0, 1));
    CHECK(std::abs(d.delta) <= delta_bound(2, 1));
  }
}

TEST_CASE("prior draws") {
  const PriorSpec prior = PriorSpec::univariate(1.0, 4.0, 5.0, 4.0);
  RandomStream rng(9);
  std::vector<double> mu, s2, delta;
  for (int k = 0; k < 40000; ++k) {
    const ChainState st = sample_prior(prior, 2, rng);
    mu.push_back(st.mu(0));
    s2.push_back(st.sigma(0, 0));
    delta.push_back(st.delta);
  }
  CHECK(mean_of(mu) == Approx(1.0).epsilon(0.02));
  CHECK(var_of(mu) == Approx(4.0).epsilon(0.03));
  // IG(5, 4): mean 1, variance 1/3.
  CHECK(mean_of(s2) == Approx(1.0).epsilon(0.01));
  CHECK(var_of(s2) == Approx(1.0 / 3.0).epsilon(0.06));
  const double bound = delta_bound(1, 2);
  CHECK(std::abs(mean_of(delta)) < 0.01);
  CHECK(var_of(delta) == Approx(bound * bound / 3.0).epsilon(0.03));
}

TEST_CASE("simulated data have the representation moments") {
  RandomStream rng(31);
  const double mu = 1.0, s2 = 0.16, delta = -0.6;
  const AugmentedSample sim =
      simulate_augmented(Vector::Constant(1, mu), scalar(s2), delta, 2, 200000, rng);
  const Vector z = sim.data.log_values().col(0);
  const double mean = mu + delta * std::sqrt(s2) * 2.0 * std::sqrt(2.0 / std::numbers::pi);
  const double var = s2 * (1.0 - 2.0 * delta * delta) +
                     s2 * delta * delta * 2.0 * (1.0 - 2.0 / std::numbers::pi);
  CHECK(z.mean() == Approx(mean).epsilon(2e-3));
  CHECK((z.array() - z.mean()).square().mean() == Approx(var).epsilon(0.01));
  CHECK(sim.latent.rows() == 200000);
  CHECK((sim.latent.array() >= 0.0).all());
}

TEST_CASE("prior recovery without data") {
  const PriorSpec prior = PriorSpec::univariate(0.5, 2.0, 4.0, 3.0);
  ChainConfig c;
  c.iterations = 30000;
  c.burnin = 2000;
  c.adapt_until = 2000;
  c.thin = 1;
  c.n_chains = 1;
  const ChainRun run = run_chain(DataMatrix::empty(1), prior, c, 2);
  const Matrix f = flatten(run.chains[0], 1);
  CHECK(f.col(0).mean() == Approx(0.5).epsilon(0.1));
  // IG(4, 3) mean 1.
  CHECK(f.col(1).mean() == Approx(1.0).epsilon(0.08));
  CHECK(std::abs(f.col(2).mean()) < 0.06);
}

TEST_CASE("direct conditional kernel") {
  const DataMatrix y = column({0.7, 1.3, 2.2});
  const PriorSpec prior = PriorSpec::univariate(0.2, 3.0, 2.0, 1.0);
  ChainState st = univariate_state(0.1, 0.5, 0.0, Matrix(0, 2));
  // At delta = 0 the skewing factor is constant, leaving the conjugate normal kernel.
  auto normal_part = [&](double mu) {
    double s = -0.5 * (mu - 0.2) * (mu - 0.2) / 3.0;
    for (Index i = 0; i < 3; ++i) {
      const double r = y.log_values()(i, 0) - mu;
      s -= 0.5 * r * r / 0.5;
    }
    return s;
  };
  const double k1 = direct_conditional_logkernel(ConditionalTarget::Mu, st, y, prior, 2);
  st.mu(0) = 0.9;
  const double k2 = direct_conditional_logkernel(ConditionalTarget::Mu, st, y, prior, 2);
  CHECK(k2 - k1 == Approx(normal_part(0.9) - normal_part(0.1)).epsilon(1e-10));

  st.delta = 0.75;
  CHECK(direct_conditional_logkernel(ConditionalTarget::Delta, st, y, prior, 2) ==
        -std::numeric_limits<double>::infinity());
  st.delta = 0.3;
  CHECK(kind_of([&] {
          direct_conditional_logkernel(ConditionalTarget::Delta, st, column({1, 2, 3, 4, 5, 6, 7}),
                                       prior, 2);
        }) == ErrorKind::DimensionTooLarge);
}
