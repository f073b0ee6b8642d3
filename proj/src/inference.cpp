#include "lcfusn/inference.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "lcfusn/error.hpp"
#include "lcfusn/normal.hpp"
#include "lcfusn/summary.hpp"

namespace lcfusn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 2.0 * kLogSqrt2Pi;
constexpr long kAdaptWindow = 50;
constexpr double kSigmaTargetRate = 0.30;
constexpr double kDeltaTargetRate = 0.44;

/// Data summaries that do not depend on Sigma or delta. The raw sums are
/// taken about mu, the centered ones about the sample means (for the target
/// with mu integrated out).
struct Sufficient {
  Index rows = 0;
  Matrix szz;  // sum (z_i - mu)(z_i - mu)'
  Vector szs;  // sum (z_i - mu) s_i
  double sss = 0.0;
  Vector zbar;
  double sbar = 0.0;
  Matrix czz;
  Vector czs;
  double css = 0.0;

  /// The same summaries after s_i -> r s_i.
  Sufficient scaled(double r) const {
    Sufficient out = *this;
    out.szs *= r;
    out.sss *= r * r;
    out.sbar *= r;
    out.czs *= r;
    out.css *= r * r;
    return out;
  }
};

Vector latent_sums(const Matrix& latent) {
  return latent.cols() == 0 ? Vector::Zero(latent.rows()) : Vector(latent.rowwise().sum());
}

Sufficient sufficient(const DataMatrix& data, const Vector& mu, const Matrix& latent) {
  Sufficient st;
  st.rows = data.rows();
  const Matrix r = data.log_values().rowwise() - mu.transpose();
  const Vector s = latent_sums(latent);
  st.szz = r.transpose() * r;
  st.szs = r.transpose() * s;
  st.sss = s.squaredNorm();
  if (st.rows > 0) {
    st.zbar = data.log_values().colwise().mean().transpose();
    st.sbar = s.mean();
    const Matrix zc = data.log_values().rowwise() - st.zbar.transpose();
    const Vector sc = s.array() - st.sbar;
    st.czz = zc.transpose() * zc;
    st.czs = zc.transpose() * sc;
    st.css = sc.squaredNorm();
  }
  return st;
}

double quadratic_trace(const SymMatrix& inv, const Matrix& zz, const Vector& zs, double ss,
                       const Vector& b) {
  const Matrix e = zz - zs * b.transpose() - b * zs.transpose() + ss * b * b.transpose();
  return (inv.matrix().cwiseProduct(e)).sum();
}

double augmented_loglik(const Sufficient& st, const AugmentedKernel& k) {
  const Index n = k.b.size();
  const double quad = quadratic_trace(k.cov_inv, st.szz, st.szs, st.sss, k.b);
  const auto rows = static_cast<double>(st.rows);
  return -0.5 * rows * (static_cast<double>(n) * kLog2Pi + k.log_det_cov) - 0.5 * quad;
}

/// Data part of the log target for the Metropolis steps: the augmented
/// likelihood given mu, or its integral against the N(mu0, Sigma_mu) prior.
double data_log_target(const Sufficient& st, const AugmentedKernel& k, const PriorSpec& prior,
                       MuHandling mode) {
  if (mode == MuHandling::Conditional || st.rows == 0) return augmented_loglik(st, k);
  const Index n = k.b.size();
  const auto rows = static_cast<double>(st.rows);
  const double within = quadratic_trace(k.cov_inv, st.czz, st.czs, st.css, k.b);
  const Vector rbar = st.zbar - k.b * st.sbar;
  const Matrix cov = k.cov_chol * k.cov_chol.transpose();
  const SymMatrix pred(prior.sigma_mu.matrix() + cov / rows);
  return -0.5 * rows * (static_cast<double>(n) * kLog2Pi + k.log_det_cov) - 0.5 * within +
         0.5 * (k.log_det_cov - static_cast<double>(n) * std::log(rows)) +
         0.5 * static_cast<double>(n) * kLog2Pi + mvn_logpdf(rbar, prior.mu0, pred);
}

/// Solves L x = b for lower-triangular L.
Vector lower_solve(const Matrix& l, const Vector& b) {
  return l.triangularView<Eigen::Lower>().solve(b);
}

double reflect(double x, double bound) {
  while (x > bound || x < -bound) x = x > bound ? 2.0 * bound - x : -2.0 * bound - x;
  return x;
}

/// Marsaglia-Tsang gamma(shape, 1) draw.
double gamma_draw(double shape, RandomStream& rng) {
  if (shape < 1.0) return gamma_draw(shape + 1.0, rng) * std::pow(rng.uniform(), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

bool try_cholesky(const SymMatrix& s, Matrix& out) {
  try {
    out = cholesky(s);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
  for (Index i = 0; i < values_.rows(); ++i)
    for (Index j = 0; j < values_.cols(); ++j)
      if (!(values_(i, j) > 0.0) || !std::isfinite(values_(i, j)))
        fail(ErrorKind::NonPositiveValue, "row " + std::to_string(i) + ", column " +
                                              std::to_string(j) +
                                              ": observations must be finite and positive");
  log_values_ = values_.array().log().matrix();
}

DataMatrix DataMatrix::empty(Index n) { return DataMatrix(Matrix(0, n), Matrix(0, n)); }

PriorSpec PriorSpec::multivariate(Vector mu0, SymMatrix sigma_mu, double d, SymMatrix D) {
  PriorSpec p;
  p.mu0 = std::move(mu0);
  p.sigma_mu = std::move(sigma_mu);
  p.d = d;
  p.D = std::move(D);
  p.validate();
  return p;
}

PriorSpec PriorSpec::univariate(double mu0, double v, double alpha, double beta) {
  if (!(v > 0.0) || !(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(mu0))
    fail(ErrorKind::DomainError, "univariate prior needs finite mu0 and v, alpha, beta > 0");
  PriorSpec p;
  p.mu0 = Vector::Constant(1, mu0);
  p.sigma_mu = SymMatrix(Matrix::Constant(1, 1, v));
  p.d = 2.0 * alpha;
  p.D = SymMatrix(Matrix::Constant(1, 1, 2.0 * beta));
  p.univariate_form = true;
  p.validate();
  return p;
}

void PriorSpec::validate() const {
  const Index n = mu0.size();
  if (n == 0) fail(ErrorKind::DimensionError, "prior has dimension 0");
  if (sigma_mu.dim() != n || D.dim() != n)
    fail(ErrorKind::DimensionError, "prior blocks disagree on the dimension");
  if (!all_finite(mu0)) fail(ErrorKind::DomainError, "prior mean is not finite");
  // IW(d, D) is proper for d > n - 1; the multivariate form asks for d > n.
  if (univariate_form) {
    if (!(d > 0.0)) fail(ErrorKind::DomainError, "alpha must be positive");
  } else if (!(d > static_cast<double>(n))) {
    fail(ErrorKind::DomainError, "inverse Wishart degrees of freedom must exceed n");
  }
  Matrix l;
  if (!try_cholesky(sigma_mu, l) || !try_cholesky(D, l))
    fail(ErrorKind::DomainError, "prior scale matrices must be positive definite");
}

double delta_bound(Index n, Index m) noexcept {
  return 1.0 / std::sqrt(static_cast<double>(n * m)) - kDeltaMargin;
}

void ChainState::check(Index m) const {
  if (!all_finite(mu) || !all_finite(sigma.matrix()) || !std::isfinite(delta) ||
      !all_finite(latent))
    fail(ErrorKind::NonFinite, "chain state is not finite at iteration " +
                                   std::to_string(iteration));
  if (std::abs(delta) > delta_bound(dim(), m))
    fail(ErrorKind::DomainError, "delta outside its support");
  if (latent.size() > 0 && latent.minCoeff() < 0.0)
    fail(ErrorKind::DomainError, "negative latent value");
}

void ChainConfig::validate() const {
  if (iterations <= 0 || burnin < 0 || burnin >= iterations)
    fail(ErrorKind::Usage, "need 0 <= burnin < iterations");
  if (thin < 1) fail(ErrorKind::Usage, "thin must be at least 1");
  if (n_chains < 1) fail(ErrorKind::Usage, "need at least one chain");
  if (!(sigma_step > 0.0) || !(delta_step > 0.0) || !(expansion_step > 0.0))
    fail(ErrorKind::Usage, "proposal steps must be positive");
  if (adapt_until < 0 || adapt_until > burnin)
    fail(ErrorKind::Usage, "adaptation must stop by the end of burn-in");
}

AugmentedKernel AugmentedKernel::make(const SymMatrix& sigma, double delta, Index m) {
  const Index n = sigma.dim();
  const Matrix root = sqrt_psd(sigma).matrix();
  const Matrix w = Matrix::Identity(n, n) -
                   static_cast<double>(m) * delta * delta * Matrix::Ones(n, n);
  const Matrix c = root * w * root;
  AugmentedKernel k;
  const SymMatrix cs(0.5 * (c + c.transpose()));
  k.cov_chol = cholesky(cs);
  const Matrix inv = k.cov_chol.transpose().triangularView<Eigen::Upper>().solve(
      k.cov_chol.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n)));
  k.cov_inv = SymMatrix(0.5 * (inv + inv.transpose()));
  k.log_det_cov = log_det_from_cholesky(k.cov_chol);
  k.b = delta * root * Vector::Ones(n);
  return k;
}

double loglik(const DataMatrix& data, const Vector& mu, const SymMatrix& sigma, double delta,
              Index m, const MvnOptions& opts) {
  const LcfusnParams params(mu, sigma, SkewnessMatrix::parsimonious(delta, mu.size(), m));
  double total = 0.0;
  for (Index i = 0; i < data.rows(); ++i)
    total += lcfusn_logpdf(data.values().row(i).transpose(), params, opts);
  return total;
}

double augmented_loglik(const ChainState& state, const DataMatrix& data) {
  return augmented_loglik(sufficient(data, state.mu, state.latent),
                          AugmentedKernel::make(state.sigma, state.delta, state.m()));
}

double log_prior_mu(const Vector& mu, const PriorSpec& prior) {
  const Matrix l = cholesky(prior.sigma_mu);
  return -0.5 * lower_solve(l, mu - prior.mu0).squaredNorm();
}

double log_prior_sigma(const SymMatrix& sigma, const PriorSpec& prior) {
  const Index n = sigma.dim();
  const Matrix l = cholesky(sigma);
  const Matrix linv_d = lower_solve(l, Matrix::Identity(n, n));
  // tr(D Sigma^{-1}) = tr(L^{-1} D L^{-T})
  const double tr = (linv_d * prior.D.matrix() * linv_d.transpose()).trace();
  return -0.5 * (prior.d + static_cast<double>(n) + 1.0) * log_det_from_cholesky(l) - 0.5 * tr;
}

Vector update_mu(const ChainState& state, const DataMatrix& data, const PriorSpec& prior,
                 RandomStream& rng) {
  const Index n = state.dim();
  const AugmentedKernel k = AugmentedKernel::make(state.sigma, state.delta, state.m());
  const SymMatrix prior_prec = inverse_pd(prior.sigma_mu);
  const auto rows = static_cast<double>(data.rows());
  const Matrix prec = prior_prec.matrix() + rows * k.cov_inv.matrix();
  Vector rhs = prior_prec.matrix() * prior.mu0;
  if (data.rows() > 0) {
    const Vector resid = data.log_values().colwise().sum().transpose() -
                         k.b * latent_sums(state.latent).sum();
    rhs += k.cov_inv.matrix() * resid;
  }
  const Matrix r = cholesky(SymMatrix(0.5 * (prec + prec.transpose())));
  const Vector mean = r.transpose().triangularView<Eigen::Upper>().solve(lower_solve(r, rhs));
  Vector xi(n);
  for (Index j = 0; j < n; ++j) xi[j] = rng.normal();
  return mean + r.transpose().triangularView<Eigen::Upper>().solve(xi);
}

SigmaMove update_sigma(const ChainState& state, const DataMatrix& data, const PriorSpec& prior,
                       double step, RandomStream& rng, MuHandling mode) {
  const Index n = state.dim();
  const Index m = state.m();
  const Sufficient st = sufficient(data, state.mu, state.latent);

  // Log target on the unconstrained scale. For n = 1 the coordinate is
  // log sigma^2 with Jacobian sigma^2; otherwise (log L_ii, L_ij) with
  // Jacobian 2^n prod L_ii^{n-i+2}.
  auto target = [&](const Matrix& l) {
    const SymMatrix sigma(l * l.transpose());
    double log_jac = 0.0;
    for (Index i = 0; i < n; ++i)
      log_jac += static_cast<double>(n == 1 ? 2 : n - i + 1) * std::log(l(i, i));
    try {
      return log_prior_sigma(sigma, prior) +
             data_log_target(st, AugmentedKernel::make(sigma, state.delta, m), prior, mode) +
             log_jac;
    } catch (const Error&) {
      return kNegInf;
    }
  };

  const Matrix l = cholesky(state.sigma);
  Matrix proposal = l;
  if (n == 1) {
    proposal(0, 0) = l(0, 0) * std::exp(0.5 * step * rng.normal());
  } else {
    for (Index i = 0; i < n; ++i) {
      proposal(i, i) = l(i, i) * std::exp(step * rng.normal());
      for (Index j = 0; j < i; ++j) proposal(i, j) = l(i, j) + step * rng.normal();
    }
  }
  const double log_ratio = target(proposal) - target(l);
  if (std::log(rng.uniform()) < log_ratio)
    return {SymMatrix(proposal * proposal.transpose()), true};
  return {state.sigma, false};
}

DeltaMove update_delta(const ChainState& state, const DataMatrix& data, const PriorSpec& prior,
                       double step, RandomStream& rng, MuHandling mode) {
  const Index n = state.dim();
  const Index m = state.m();
  const double bound = delta_bound(n, m);
  const Sufficient st = sufficient(data, state.mu, state.latent);
  const double proposal = reflect(state.delta + step * rng.normal(), bound);
  const double log_ratio =
      data_log_target(st, AugmentedKernel::make(state.sigma, proposal, m), prior, mode) -
      data_log_target(st, AugmentedKernel::make(state.sigma, state.delta, m), prior, mode);
  if (std::log(rng.uniform()) < log_ratio) return {proposal, true};
  return {state.delta, false};
}

Matrix update_latents(const ChainState& state, const DataMatrix& data, RandomStream& rng) {
  const Index m = state.m();
  const AugmentedKernel k = AugmentedKernel::make(state.sigma, state.delta, m);
  const Vector cinv_b = k.cov_inv.matrix() * k.b;
  const double c = k.b.dot(cinv_b);
  const double sd = 1.0 / std::sqrt(1.0 + c);
  Matrix latent = state.latent;
  for (Index i = 0; i < data.rows(); ++i) {
    const double g = cinv_b.dot(data.log_values().row(i).transpose() - state.mu);
    double total = latent.row(i).sum();
    for (Index j = 0; j < m; ++j) {
      const double others = total - latent(i, j);
      latent(i, j) = sample_truncnorm((g - c * others) / (1.0 + c), sd, 0.0, rng);
      total = others + latent(i, j);
    }
  }
  return latent;
}

ExpansionMove update_expansion(const ChainState& state, const DataMatrix& data,
                               const PriorSpec& prior, double step, RandomStream& rng,
                               MuHandling mode) {
  const Index n = state.dim();
  const Index m = state.m();
  const double log_r = step * rng.normal();
  const double r = std::exp(log_r);
  const double proposal = state.delta / r;
  const double u = std::log(rng.uniform());
  if (std::abs(proposal) > delta_bound(n, m)) return {state.delta, state.latent, false};

  // delta * s_i is unchanged, so the sufficient statistics only need the
  // latent sums rescaled.
  const Sufficient st = sufficient(data, state.mu, state.latent);
  const Sufficient moved = st.scaled(r);
  const double latent_sq = state.latent.squaredNorm();
  const double dims = static_cast<double>(state.latent.size());
  const double log_ratio =
      data_log_target(moved, AugmentedKernel::make(state.sigma, proposal, m), prior, mode) -
      data_log_target(st, AugmentedKernel::make(state.sigma, state.delta, m), prior, mode) -
      0.5 * (r * r - 1.0) * latent_sq + (dims - 1.0) * log_r;
  if (u < log_ratio) return {proposal, state.latent * r, true};
  return {state.delta, state.latent, false};
}

AugmentedSampler::AugmentedSampler(DataMatrix data, PriorSpec prior, Index m, ChainConfig config,
                                   RandomStream rng)
    : data_(std::move(data)),
      prior_(std::move(prior)),
      m_(m),
      config_(std::move(config)),
      rng_(rng),
      sigma_step_(config_.sigma_step),
      delta_step_(config_.delta_step),
      expansion_step_(config_.expansion_step) {
  if (m_ < 1) fail(ErrorKind::DimensionError, "m must be at least 1");
  prior_.validate();
  if (data_.dim() != prior_.dim())
    fail(ErrorKind::DimensionError, "data has " + std::to_string(data_.dim()) +
                                        " columns but the prior has dimension " +
                                        std::to_string(prior_.dim()));
  initialize();
}

void AugmentedSampler::initialize() {
  const Index n = prior_.dim();
  const Index rows = data_.rows();
  const double bound = delta_bound(n, m_);
  ChainState s;

  s.mu = rows > 0 ? Vector(data_.log_values().colwise().mean().transpose()) : prior_.mu0;
  // Inverse-Wishart mode as fallback scale.
  SymMatrix sigma(prior_.D.matrix() / (prior_.d + static_cast<double>(n) + 1.0));
  if (rows >= n + 2) {
    const Matrix r = data_.log_values().rowwise() - s.mu.transpose();
    const SymMatrix cov(r.transpose() * r / static_cast<double>(rows - 1));
    Matrix l;
    if (try_cholesky(cov, l)) sigma = cov;
  }
  s.sigma = sigma;
  s.delta = 0.0;

  if (config_.overdispersed_init) {
    const Matrix l = cholesky(s.sigma);
    Vector xi(n);
    for (Index j = 0; j < n; ++j) xi[j] = rng_.normal();
    s.mu += 2.0 * l * xi;
    s.sigma = SymMatrix(s.sigma.matrix() * std::exp(rng_.normal()));
    s.delta = bound * (2.0 * rng_.uniform() - 1.0);
  }
  if (config_.init_mu) s.mu = *config_.init_mu;
  if (config_.init_sigma) s.sigma = *config_.init_sigma;
  if (config_.init_delta) s.delta = *config_.init_delta;
  if (s.mu.size() != n || s.sigma.dim() != n)
    fail(ErrorKind::DimensionError, "initial values have the wrong dimension");

  s.latent.resize(rows, m_);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < m_; ++j) s.latent(i, j) = std::abs(rng_.normal());
  s.check(m_);
  state_ = std::move(s);
}

void AugmentedSampler::set_state(ChainState state) {
  if (state.dim() != prior_.dim() || state.latent.rows() != data_.rows() ||
      state.latent.cols() != m_)
    fail(ErrorKind::DimensionError, "state does not match the sampler");
  state.check(m_);
  state_ = std::move(state);
}

void AugmentedSampler::set_data(DataMatrix data, std::optional<Matrix> latent) {
  if (data.dim() != prior_.dim()) fail(ErrorKind::DimensionError, "data dimension changed");
  data_ = std::move(data);
  if (latent && latent->rows() == data_.rows() && latent->cols() == m_) {
    state_.latent = std::move(*latent);
  } else {
    state_.latent.resize(data_.rows(), m_);
    for (Index i = 0; i < data_.rows(); ++i)
      for (Index j = 0; j < m_; ++j) state_.latent(i, j) = std::abs(rng_.normal());
  }
}

double AugmentedSampler::sigma_acceptance() const noexcept {
  return sigma_tries_ == 0 ? 0.0 : static_cast<double>(sigma_accepts_) / sigma_tries_;
}

double AugmentedSampler::expansion_acceptance() const noexcept {
  return expansion_tries_ == 0 ? 0.0
                               : static_cast<double>(expansion_accepts_) / expansion_tries_;
}

double AugmentedSampler::delta_acceptance() const noexcept {
  return delta_tries_ == 0 ? 0.0 : static_cast<double>(delta_accepts_) / delta_tries_;
}

void AugmentedSampler::sweep() {
  // With mu integrated out of the Metropolis targets the scan is latents,
  // Sigma, delta, expansion, then an exact mu draw; otherwise mu, Sigma,
  // delta, latents, expansion, each conditional on everything else.
  const bool collapse = config_.integrate_mu && config_.update_mu;
  const MuHandling mode = collapse ? MuHandling::Integrated : MuHandling::Conditional;
  if (collapse) {
    if (config_.update_latents) state_.latent = update_latents(state_, data_, rng_);
  } else if (config_.update_mu) {
    state_.mu = update_mu(state_, data_, prior_, rng_);
  }
  if (config_.update_sigma) {
    const SigmaMove mv = update_sigma(state_, data_, prior_, sigma_step_, rng_, mode);
    state_.sigma = mv.sigma;
    ++sigma_tries_;
    ++window_sigma_tries_;
    sigma_accepts_ += mv.accepted;
    window_sigma_accepts_ += mv.accepted;
  }
  if (config_.update_delta) {
    const DeltaMove mv = update_delta(state_, data_, prior_, delta_step_, rng_, mode);
    state_.delta = mv.delta;
    ++delta_tries_;
    ++window_delta_tries_;
    delta_accepts_ += mv.accepted;
    window_delta_accepts_ += mv.accepted;
  }
  if (!collapse && config_.update_latents)
    state_.latent = update_latents(state_, data_, rng_);
  if (config_.expansion_move && config_.update_delta && config_.update_latents &&
      data_.rows() > 0) {
    ExpansionMove mv = update_expansion(state_, data_, prior_, expansion_step_, rng_, mode);
    state_.delta = mv.delta;
    state_.latent = std::move(mv.latent);
    ++expansion_tries_;
    ++window_expansion_tries_;
    expansion_accepts_ += mv.accepted;
    window_expansion_accepts_ += mv.accepted;
  }
  if (collapse) state_.mu = update_mu(state_, data_, prior_, rng_);
  ++state_.iteration;
  if (!all_finite(state_.mu) || !all_finite(state_.sigma.matrix()) ||
      !std::isfinite(state_.delta) || !all_finite(state_.latent))
    fail(ErrorKind::NonFinite,
         "non-finite state at iteration " + std::to_string(state_.iteration) + " (seed " +
             std::to_string(rng_.seed()) + ", chain " + std::to_string(rng_.stream_id()) +
             ", sigma step " + std::to_string(sigma_step_) + ", delta step " +
             std::to_string(delta_step_) + ")");
  if (state_.iteration < config_.adapt_until && state_.iteration % kAdaptWindow == 0) adapt();
}

void AugmentedSampler::adapt() {
  const double batch = static_cast<double>(state_.iteration / kAdaptWindow);
  const double amount = std::min(0.1, 1.0 / std::sqrt(batch));
  auto tune = [&](double& step, long& tries, long& accepts, double target) {
    if (tries == 0) return;
    const double rate = static_cast<double>(accepts) / static_cast<double>(tries);
    step *= std::exp(rate > target ? amount : -amount);
    tries = 0;
    accepts = 0;
  };
  tune(sigma_step_, window_sigma_tries_, window_sigma_accepts_, kSigmaTargetRate);
  tune(delta_step_, window_delta_tries_, window_delta_accepts_, kDeltaTargetRate);
  tune(expansion_step_, window_expansion_tries_, window_expansion_accepts_, kDeltaTargetRate);
}

std::vector<std::string> parameter_names(Index n) {
  std::vector<std::string> names;
  for (Index i = 0; i < n; ++i) names.push_back("mu_" + std::to_string(i + 1));
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j)
      names.push_back("sigma_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  names.emplace_back("delta");
  return names;
}

Matrix flatten(const Chain& chain, Index n) {
  const Index p = n + n * (n + 1) / 2 + 1;
  Matrix out(static_cast<Index>(chain.draws.size()), p);
  for (Index t = 0; t < out.rows(); ++t) {
    const Draw& d = chain.draws[static_cast<std::size_t>(t)];
    Index c = 0;
    for (Index i = 0; i < n; ++i) out(t, c++) = d.mu[i];
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) out(t, c++) = d.sigma(i, j);
    out(t, c) = d.delta;
  }
  return out;
}

ChainRun run_chain(const DataMatrix& data, const PriorSpec& prior, const ChainConfig& config,
                   Index m) {
  config.validate();
  prior.validate();
  const Index n = prior.dim();
  ChainRun run;
  run.n = n;
  run.m = m;
  run.names = parameter_names(n);
  run.chains.resize(static_cast<std::size_t>(config.n_chains));
  std::vector<std::exception_ptr> errors(run.chains.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < config.n_chains; ++c) {
    try {
      AugmentedSampler sampler(data, prior, m, config,
                               RandomStream(config.seed, static_cast<std::uint64_t>(c)));
      Chain& chain = run.chains[static_cast<std::size_t>(c)];
      chain.draws.reserve(static_cast<std::size_t>((config.iterations - config.burnin) /
                                                   config.thin + 1));
      for (long it = 1; it <= config.iterations; ++it) {
        sampler.sweep();
        if (it > config.burnin && (it - config.burnin) % config.thin == 0) {
          const ChainState& s = sampler.state();
          chain.draws.push_back({s.mu, s.sigma, s.delta, it});
        }
      }
      chain.sigma_acceptance = sampler.sigma_acceptance();
      chain.delta_acceptance = sampler.delta_acceptance();
      chain.sigma_step = sampler.sigma_step();
      chain.delta_step = sampler.delta_step();
      chain.expansion_acceptance = sampler.expansion_acceptance();
      chain.expansion_step = sampler.expansion_step();
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const std::size_t kept = run.chains.front().draws.size();
  if (kept >= 4) {
    std::vector<Matrix> flat;
    for (const auto& ch : run.chains) flat.push_back(flatten(ch, n));
    for (std::size_t p = 0; p < run.names.size(); ++p) {
      std::vector<Vector> per_chain;
      double ess = 0.0;
      for (const auto& f : flat) {
        per_chain.emplace_back(f.col(static_cast<Index>(p)));
        ess += effective_sample_size(per_chain.back());
      }
      run.ess.push_back(ess);
      run.rhat.push_back(split_rhat(per_chain));
    }
  }
  return run;
}

ChainState sample_prior(const PriorSpec& prior, Index m, RandomStream& rng) {
  prior.validate();
  const Index n = prior.dim();
  ChainState s;
  const Matrix lmu = cholesky(prior.sigma_mu);
  Vector xi(n);
  for (Index j = 0; j < n; ++j) xi[j] = rng.normal();
  s.mu = prior.mu0 + lmu * xi;

  // Bartlett decomposition of W ~ Wishart(d, D^{-1}); Sigma = W^{-1}.
  const Matrix ld = cholesky(inverse_pd(prior.D));
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    a(i, i) = std::sqrt(2.0 * gamma_draw(0.5 * (prior.d - static_cast<double>(i)), rng));
    for (Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix la = ld * a;
  s.sigma = inverse_pd(SymMatrix(la * la.transpose()));

  const double bound = delta_bound(n, m);
  s.delta = bound * (2.0 * rng.uniform() - 1.0);
  s.latent.resize(0, m);
  return s;
}

AugmentedSample simulate_augmented(const Vector& mu, const SymMatrix& sigma, double delta,
                                   Index m, Index count, RandomStream& rng) {
  const Index n = mu.size();
  const AugmentedKernel k = AugmentedKernel::make(sigma, delta, m);
  Matrix values(count, n);
  Matrix latent(count, m);
  Vector eps(n);
  for (Index i = 0; i < count; ++i) {
    for (Index j = 0; j < m; ++j) latent(i, j) = std::abs(rng.normal());
    for (Index j = 0; j < n; ++j) eps[j] = rng.normal();
    const Vector z = mu + k.b * latent.row(i).sum() + k.cov_chol * eps;
    values.row(i) = z.array().exp().transpose();
  }
  return {DataMatrix(std::move(values)), std::move(latent)};
}

double direct_conditional_logkernel(ConditionalTarget target, const ChainState& state,
                                    const DataMatrix& data, const PriorSpec& prior, Index m) {
  const Index n = state.dim();
  const Index rows = data.rows();
  if (rows * m > kMaxMvnDim)
    fail(ErrorKind::DimensionTooLarge,
         "L m = " + std::to_string(rows * m) + " exceeds " + std::to_string(kMaxMvnDim));
  if (std::abs(state.delta) > delta_bound(n, m)) return kNegInf;
  Matrix l;
  if (!try_cholesky(state.sigma, l)) return kNegInf;

  double lp = 0.0;
  if (target == ConditionalTarget::Mu) lp = log_prior_mu(state.mu, prior);
  if (target == ConditionalTarget::Sigma) lp = log_prior_sigma(state.sigma, prior);

  const LcfusnParams params(state.mu, state.sigma,
                            SkewnessMatrix::parsimonious(state.delta, n, m));
  const Matrix& dt = params.delta().matrix();
  double quad = 0.0;
  Vector upper(rows * m);
  for (Index i = 0; i < rows; ++i) {
    const Vector u = params.standardize(data.log_values().row(i).transpose());
    quad += u.squaredNorm();
    upper.segment(i * m, m) = dt.transpose() * u;
  }
  const double normal_part =
      -0.5 * static_cast<double>(rows) * params.log_det_sigma() - 0.5 * quad;
  if (rows == 0) return lp;

  Matrix cov = Matrix::Zero(rows * m, rows * m);
  for (Index i = 0; i < rows; ++i) cov.block(i * m, i * m, m, m) = params.skew_cov().matrix();
  const SymMatrix cov_s(cov);
  // The product of L orthant probabilities is tiny, so ask for a relative
  // accuracy after a first pass gives the scale.
  MvnOptions opts;
  const CdfResult first = mvn_cdf(upper, cov_s, opts);
  if (first.value > 0.0 && first.value < 1e-2) {
    opts.tol = std::max(first.value * 1e-5, 1e-300);
    return lp + normal_part + std::log(mvn_cdf(upper, cov_s, opts).value);
  }
  return lp + normal_part + std::log(first.value);
}

}  // namespace lcfusn
