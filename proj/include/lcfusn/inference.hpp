#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcfusn/distributions.hpp"
#include "lcfusn/random.hpp"

namespace lcfusn {

/// L x n matrix of strictly positive observations with cached logs.
class DataMatrix {
 public:
  /// Throws NonPositiveValue naming the first offending (0-based) row.
  explicit DataMatrix(Matrix values);
  static DataMatrix empty(Index n);

  Index rows() const noexcept { return values_.rows(); }
  Index dim() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }
  const Matrix& log_values() const noexcept { return log_values_; }

 private:
  DataMatrix(Matrix values, Matrix logs) : values_(std::move(values)), log_values_(std::move(logs)) {}
  Matrix values_;
  Matrix log_values_;
};

/// Priors: mu ~ N(mu0, Sigma_mu), Sigma ~ IW(d, D) with density proportional
/// to |Sigma|^{-(d+n+1)/2} exp(-tr(D Sigma^{-1})/2), delta uniform on the
/// admissible interval. For n = 1 the univariate form mu ~ N(mu0, v),
/// sigma^2 ~ IG(alpha, beta) (shape alpha, scale beta) is the same family with
/// d = 2 alpha and D = 2 beta.
struct PriorSpec {
  Vector mu0;
  SymMatrix sigma_mu;
  double d = 0.0;
  SymMatrix D;
  bool univariate_form = false;

  static PriorSpec multivariate(Vector mu0, SymMatrix sigma_mu, double d, SymMatrix D);
  static PriorSpec univariate(double mu0, double v, double alpha, double beta);

  Index dim() const noexcept { return mu0.size(); }
  double alpha() const noexcept { return 0.5 * d; }
  double beta() const { return 0.5 * D(0, 0); }
  /// Throws DomainError when a hyperparameter is out of range.
  void validate() const;
};

/// Boundary margin on the delta support.
inline constexpr double kDeltaMargin = 1e-6;

/// Half-width of the delta support, 1/sqrt(n m) - kDeltaMargin.
double delta_bound(Index n, Index m) noexcept;

/// State of the augmented sampler for Delta = delta 1_{n,m}.
struct ChainState {
  Vector mu;
  SymMatrix sigma;
  double delta = 0.0;
  /// L x m matrix of |X_i|.
  Matrix latent;
  long iteration = 0;

  Index dim() const noexcept { return mu.size(); }
  Index m() const noexcept { return latent.cols(); }
  /// Checks the support invariants; throws NonFinite or DomainError.
  void check(Index m) const;
};

struct ChainConfig {
  long iterations = 20000;
  long burnin = 5000;
  long thin = 5;
  std::uint64_t seed = 20140901;
  int n_chains = 2;
  double sigma_step = 0.1;
  double delta_step = 0.05;
  /// Proposal scales adapt during iterations [0, adapt_until); must not
  /// exceed burnin so retained draws come from a fixed kernel.
  long adapt_until = 5000;
  bool update_mu = true;
  bool update_sigma = true;
  bool update_delta = true;
  bool update_latents = true;
  /// Joint rescaling (delta, |X|) -> (delta / r, r |X|) after the latent
  /// sweep. Keeps delta |X_i| fixed, so it moves along the ridge that makes
  /// plain data augmentation slow when the skewness is strong.
  bool expansion_move = true;
  /// Integrate mu out of the Sigma, delta and expansion targets and draw it
  /// exactly afterwards (requires update_mu).
  bool integrate_mu = true;
  double expansion_step = 0.05;
  /// Start chains from dispersed values (delta uniform on its support, mu and
  /// Sigma perturbed) instead of the moment-based defaults.
  bool overdispersed_init = false;
  /// Explicit initial values override the defaults component-wise.
  std::optional<Vector> init_mu;
  std::optional<SymMatrix> init_sigma;
  std::optional<double> init_delta;

  void validate() const;
};

/// Sufficient description of the conditional Gaussian model
/// ln Y_i | |X_i| ~ N(mu + b s_i, C), s_i = 1'|X_i|, b = delta Sigma^{1/2} 1_n,
/// C = Sigma^{1/2} W Sigma^{1/2}, W = I_n - m delta^2 1_{n,n}.
struct AugmentedKernel {
  Vector b;
  Matrix cov_chol;
  SymMatrix cov_inv;
  double log_det_cov = 0.0;

  static AugmentedKernel make(const SymMatrix& sigma, double delta, Index m);
};

double loglik(const DataMatrix& data, const Vector& mu, const SymMatrix& sigma, double delta,
              Index m, const MvnOptions& opts = {kMcmcTol});

/// Exact Gaussian draw of mu given everything else.
Vector update_mu(const ChainState& state, const DataMatrix& data, const PriorSpec& prior,
                 RandomStream& rng);

/// Whether a Metropolis target conditions on mu or integrates it against
/// its normal prior.
enum class MuHandling { Conditional, Integrated };

struct SigmaMove {
  SymMatrix sigma;
  bool accepted;
};

/// One random-walk Metropolis step on the log-Cholesky factor of Sigma
/// (log sigma^2 when n = 1) targeting prior x augmented likelihood.
SigmaMove update_sigma(const ChainState& state, const DataMatrix& data, const PriorSpec& prior,
                       double step, RandomStream& rng,
                       MuHandling mode = MuHandling::Conditional);

struct DeltaMove {
  double delta;
  bool accepted;
};

/// Random-walk Metropolis on delta, reflected at the support boundary.
DeltaMove update_delta(const ChainState& state, const DataMatrix& data, const PriorSpec& prior,
                       double step, RandomStream& rng,
                       MuHandling mode = MuHandling::Conditional);

struct ExpansionMove {
  double delta;
  Matrix latent;
  bool accepted;
};

/// Metropolis step on log r for (delta, |X|) -> (delta / r, r |X|), targeting
/// the augmented posterior (likelihood x half-normal latent prior x uniform
/// delta prior) with the r^{Lm-1} Jacobian.
ExpansionMove update_expansion(const ChainState& state, const DataMatrix& data,
                               const PriorSpec& prior, double step, RandomStream& rng,
                               MuHandling mode = MuHandling::Conditional);

/// One coordinate-wise Gibbs sweep over every |X_i| with exact truncated
/// normal conditionals.
Matrix update_latents(const ChainState& state, const DataMatrix& data, RandomStream& rng);

/// Log of the augmented-data likelihood f(ln Y | mu, Sigma, delta, |X|)
/// up to the 2 pi constant; the Metropolis steps use it as their target.
double augmented_loglik(const ChainState& state, const DataMatrix& data);

/// Log prior density of (mu, Sigma, delta) up to constants.
double log_prior_mu(const Vector& mu, const PriorSpec& prior);
double log_prior_sigma(const SymMatrix& sigma, const PriorSpec& prior);

/// Sampler holding one chain's state; run_chain drives several of these.
class AugmentedSampler {
 public:
  AugmentedSampler(DataMatrix data, PriorSpec prior, Index m, ChainConfig config,
                   RandomStream rng);

  /// One systematic scan (order documented in the implementation).
  void sweep();

  const ChainState& state() const noexcept { return state_; }
  void set_state(ChainState state);
  /// Replaces the data; latents are re-drawn from the prior when their
  /// shape no longer matches.
  void set_data(DataMatrix data, std::optional<Matrix> latent = std::nullopt);
  const DataMatrix& data() const noexcept { return data_; }
  RandomStream& rng() noexcept { return rng_; }

  double sigma_acceptance() const noexcept;
  double delta_acceptance() const noexcept;
  double expansion_acceptance() const noexcept;
  double sigma_step() const noexcept { return sigma_step_; }
  double delta_step() const noexcept { return delta_step_; }
  double expansion_step() const noexcept { return expansion_step_; }

 private:
  void initialize();
  void adapt();

  DataMatrix data_;
  PriorSpec prior_;
  Index m_;
  ChainConfig config_;
  RandomStream rng_;
  ChainState state_;
  double sigma_step_;
  double delta_step_;
  double expansion_step_;
  long expansion_tries_ = 0, expansion_accepts_ = 0;
  long window_expansion_tries_ = 0, window_expansion_accepts_ = 0;
  long sigma_tries_ = 0, sigma_accepts_ = 0;
  long delta_tries_ = 0, delta_accepts_ = 0;
  long window_sigma_tries_ = 0, window_sigma_accepts_ = 0;
  long window_delta_tries_ = 0, window_delta_accepts_ = 0;
};

/// One retained draw.
struct Draw {
  Vector mu;
  SymMatrix sigma;
  double delta = 0.0;
  long iteration = 0;
};

struct Chain {
  std::vector<Draw> draws;
  double sigma_acceptance = 0.0;
  double delta_acceptance = 0.0;
  double expansion_acceptance = 0.0;
  double sigma_step = 0.0;
  double delta_step = 0.0;
  double expansion_step = 0.0;
};

/// Names of the flattened parameters: mu_1..mu_n, sigma_i_j (i <= j), delta.
std::vector<std::string> parameter_names(Index n);
/// T x P matrix of a chain's draws in parameter_names order.
Matrix flatten(const Chain& chain, Index n);

struct ChainRun {
  Index n = 0;
  Index m = 0;
  std::vector<Chain> chains;
  std::vector<std::string> names;
  std::vector<double> ess;
  std::vector<double> rhat;
};

/// Runs config.n_chains independent chains (stream id = chain index) and
/// returns the post burn-in, thinned draws with ESS and split R-hat.
/// Identical inputs give bit-identical draws. Throws NonFinite if the state
/// ever leaves the support.
ChainRun run_chain(const DataMatrix& data, const PriorSpec& prior, const ChainConfig& config,
                   Index m);

/// Draw (mu, Sigma, delta) from the prior (latents empty).
ChainState sample_prior(const PriorSpec& prior, Index m, RandomStream& rng);

struct AugmentedSample {
  DataMatrix data;
  Matrix latent;
};

/// Simulate L observations together with their latent |X_i| from the
/// hierarchical representation at the given parameters.
AugmentedSample simulate_augmented(const Vector& mu, const SymMatrix& sigma, double delta,
                                   Index m, Index count, RandomStream& rng);

enum class ConditionalTarget { Mu, Sigma, Delta };

/// Unnormalized log full conditional of `target` evaluated at the state's
/// value, computed without latents: log prior + normal kernel +
/// log Phi_{mL}((I_L x Delta' Sigma^{-1/2})(vec ln Y - 1_L x mu) | I_{Lm} - I_L x Delta' Delta).
/// Requires L m <= 12 (DimensionTooLarge). Returns -inf outside the support.
double direct_conditional_logkernel(ConditionalTarget target, const ChainState& state,
                                    const DataMatrix& data, const PriorSpec& prior, Index m);

}  // namespace lcfusn
