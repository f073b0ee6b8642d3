// Command-line front end: distribution evaluation, sampling, fitting and
// model comparison. Every failure exits non-zero with a JSON object on stderr.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "lcfusn/distributions.hpp"
#include "lcfusn/error.hpp"
#include "lcfusn/inference.hpp"
#include "lcfusn/io.hpp"
#include "lcfusn/kernels.hpp"
#include "lcfusn/model_selection.hpp"
#include "lcfusn/summary.hpp"

namespace fs = std::filesystem;
using namespace lcfusn;

namespace {

struct DistOptions {
  int m = 1;
  std::vector<double> mu;
  std::vector<double> sigma;
  double delta = 0.0;
  std::vector<double> delta_matrix;
};

void add_dist_options(CLI::App* cmd, DistOptions& o) {
  cmd->add_option("--m", o.m, "Dimension of the skewing function")->check(CLI::PositiveNumber);
  cmd->add_option("--mu", o.mu, "Location vector (default zeros)")->delimiter(',');
  cmd->add_option("--sigma", o.sigma,
                  "Scale matrix, row-major n*n values (n = 1: sigma^2); default identity")
      ->delimiter(',');
  cmd->add_option("--delta", o.delta, "Scalar skewness: Delta = delta 1_{n,m}");
  cmd->add_option("--delta-matrix", o.delta_matrix, "Full n x m skewness matrix, row-major")
      ->delimiter(',');
}

Index infer_n(const DistOptions& o, Index fallback) {
  if (!o.mu.empty()) return static_cast<Index>(o.mu.size());
  if (!o.sigma.empty()) {
    const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(o.sigma.size()))));
    if (n * n != static_cast<Index>(o.sigma.size()))
      fail(ErrorKind::DimensionError, "--sigma needs n*n values");
    return n;
  }
  if (!o.delta_matrix.empty() && o.m > 0)
    return static_cast<Index>(o.delta_matrix.size()) / o.m;
  return fallback;
}

LcfusnParams build_params(const DistOptions& o, Index fallback_n = 1) {
  const Index n = infer_n(o, fallback_n);
  const Index m = o.m;
  Vector mu = Vector::Zero(n);
  if (!o.mu.empty()) mu = Eigen::Map<const Vector>(o.mu.data(), n);
  Matrix sigma = Matrix::Identity(n, n);
  if (!o.sigma.empty()) {
    if (static_cast<Index>(o.sigma.size()) != n * n)
      fail(ErrorKind::DimensionError, "--sigma needs " + std::to_string(n * n) + " values");
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) sigma(i, j) = o.sigma[static_cast<std::size_t>(i * n + j)];
  }
  if (!o.delta_matrix.empty()) {
    if (static_cast<Index>(o.delta_matrix.size()) != n * m)
      fail(ErrorKind::DimensionError, "--delta-matrix needs n*m = " + std::to_string(n * m) +
                                          " values");
    Matrix d(n, m);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) d(i, j) = o.delta_matrix[static_cast<std::size_t>(i * m + j)];
    return LcfusnParams(mu, SymMatrix(sigma), SkewnessMatrix::validate(d));
  }
  return LcfusnParams(mu, SymMatrix(sigma), SkewnessMatrix::parsimonious(o.delta, n, m));
}

Vector parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      fail(ErrorKind::Usage, "cannot parse point '" + text + "'");
    }
  }
  return Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size()));
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::string default_output_dir() {
  const char* env = std::getenv("LCFUSN_OUTPUT_DIR");
  return env && *env ? env : ".";
}

void emit_error(ErrorKind kind, const std::string& message) {
  Json j;
  j["error"] = to_string(kind);
  j["message"] = message;
  j["exit_code"] = static_cast<int>(classify(kind));
  std::cerr << j.dump() << '\n';
}

// --- fit ---------------------------------------------------------------------

struct FitOptions {
  std::string data;
  int m = 1;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<long> iterations, burnin, thin;
  std::optional<int> chains;
  std::size_t ms_draws = 1000;
};

std::vector<PredictiveQuery> queries_from_json(const Json& j) {
  std::vector<PredictiveQuery> out;
  if (!j.is_array()) return out;
  for (const auto& q : j) {
    if (q.contains("above")) out.push_back({q["above"].get<double>(), Direction::Above});
    if (q.contains("below")) out.push_back({q["below"].get<double>(), Direction::Below});
  }
  return out;
}

int run_fit(const FitOptions& o) {
  Json file_cfg = Json::object();
  if (!o.config.empty()) {
    try {
      file_cfg = Json::parse(read_text(o.config));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Usage, o.config + ": " + e.what());
    }
  }
  const DataMatrix data = read_csv(o.data);
  const Index n = data.dim();

  const PriorSpec prior = prior_from_json(file_cfg.value("prior", Json::object()), n);
  ChainConfig chain = chain_config_from_json(file_cfg.value("chain", Json::object()));
  if (o.seed) chain.seed = *o.seed;
  if (o.iterations) chain.iterations = *o.iterations;
  if (o.burnin) {
    chain.burnin = *o.burnin;
    if (!file_cfg.value("chain", Json::object()).contains("adapt_until")) chain.adapt_until = *o.burnin;
  }
  chain.adapt_until = std::min(chain.adapt_until, chain.burnin);
  if (o.thin) chain.thin = *o.thin;
  if (o.chains) chain.n_chains = *o.chains;
  chain.validate();
  const auto queries = queries_from_json(file_cfg.value("predictive", Json::array()));
  const std::size_t ms_draws = file_cfg.value("model_selection_draws", o.ms_draws);
  if (o.m * n > kMaxMvnDim)
    fail(ErrorKind::DimensionTooLarge, "m too large for density evaluation");

  const fs::path out_dir = o.out.empty() ? fs::path(default_output_dir()) : fs::path(o.out);
  fs::create_directories(out_dir);

  Json config;
  config["data"] = o.data;
  config["data_hash"] = config_hash(Json(read_text(o.data)));
  config["m"] = o.m;
  config["prior"] = prior_to_json(prior);
  config["chain"] = chain_config_to_json(chain);
  Json preds = Json::array();
  for (const auto& q : queries) {
    Json p;
    p[q.direction == Direction::Above ? "above" : "below"] = q.threshold;
    preds.push_back(p);
  }
  config["predictive"] = preds;
  config["model_selection_draws"] = ms_draws;

  const ChainRun run = run_chain(data, prior, chain, o.m);

  Json result;
  result["command"] = "fit";
  result["provenance"] = provenance(chain.seed, config);
  result["config"] = config;
  result["data"] = {{"rows", data.rows()}, {"n", n}};
  Json chains = Json::array();
  std::vector<Draw> pooled;
  for (std::size_t c = 0; c < run.chains.size(); ++c) {
    const std::string name = "chain_" + std::to_string(c) + ".csv";
    write_chain_csv((out_dir / name).string(), run.chains[c], n);
    chains.push_back({{"file", name},
                      {"draws", run.chains[c].draws.size()},
                      {"sigma_acceptance", run.chains[c].sigma_acceptance},
                      {"delta_acceptance", run.chains[c].delta_acceptance},
                      {"expansion_acceptance", run.chains[c].expansion_acceptance},
                      {"sigma_step", run.chains[c].sigma_step},
                      {"delta_step", run.chains[c].delta_step},
                      {"expansion_step", run.chains[c].expansion_step}});
    pooled.insert(pooled.end(), run.chains[c].draws.begin(), run.chains[c].draws.end());
  }
  result["chains"] = chains;
  result["diagnostics"] = {{"names", run.names}, {"ess", run.ess}, {"rhat", run.rhat}};

  Json summary = Json::array();
  if (static_cast<Index>(pooled.size()) >= kMinSummaryDraws) {
    std::vector<Matrix> flat;
    for (const auto& ch : run.chains) flat.push_back(flatten(ch, n));
    for (std::size_t p = 0; p < run.names.size(); ++p) {
      std::vector<Vector> cols;
      for (const auto& f : flat) cols.emplace_back(f.col(static_cast<Index>(p)));
      ParameterSummary s = summarize(cols);
      s.name = run.names[p];
      summary.push_back(to_json(s));
    }
  }
  result["summary"] = summary;
  if (data.rows() > 0 && pooled.size() >= 2)
    result["comparison"] = to_json(compare_fit(data, pooled, o.m, queries, ms_draws));

  const std::string text = result.dump(2) + "\n";
  write_text((out_dir / "result.json").string(), text);
  std::cout << text;
  return 0;
}

// --- compare / predict ---------------------------------------------------------

Json load_result(const std::string& path) {
  try {
    Json j = Json::parse(read_text(path));
    if (j.value("command", "") != "fit")
      fail(ErrorKind::ParseError, path + " is not a fit result");
    return j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

int run_compare(const std::vector<std::string>& fits, bool table) {
  std::vector<Json> rows;
  for (const auto& f : fits) {
    const Json r = load_result(f);
    if (!r.contains("comparison")) fail(ErrorKind::ParseError, f + " has no comparison block");
    Json row = r["comparison"];
    row["fit"] = f;
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Json& a, const Json& b) { return a["m"].get<int>() < b["m"].get<int>(); });
  if (table) {
    std::printf("%3s  %10s  %10s  %16s  %12s\n", "m", "D_n", "P-value", "DIC", "SlnCPO");
    for (const auto& r : rows)
      std::printf("%3d  %10.5f  %10.5f  %16.6g  %12.5f\n", r["m"].get<int>(),
                  r.value("ks_dn", NAN), r.value("ks_pvalue", NAN), r["dic"].get<double>(),
                  r["slncpo_mean"].get<double>());
    return 0;
  }
  Json out;
  out["command"] = "compare";
  out["models"] = rows;
  std::cout << out.dump(2) << '\n';
  return 0;
}

double resolve_threshold(const std::string& text, const Json& fit) {
  if (text == "median" || text == "mean") {
    const DataMatrix data = read_csv(fit["config"]["data"].get<std::string>());
    if (data.dim() != 1) fail(ErrorKind::DimensionError, "thresholds apply to univariate fits");
    const Vector y = data.values().col(0);
    return text == "mean" ? y.mean() : quantile(y, 0.5);
  }
  const Vector v = parse_point(text);
  if (v.size() != 1) fail(ErrorKind::Usage, "threshold must be a single number");
  return v[0];
}

int run_predict(const std::string& fit_path, const std::vector<std::string>& above,
                const std::vector<std::string>& below) {
  if (above.empty() && below.empty()) fail(ErrorKind::Usage, "give --above and/or --below");
  const Json fit = load_result(fit_path);
  const Index n = fit["data"]["n"].get<Index>();
  const Index m = fit["config"]["m"].get<Index>();
  if (n != 1) fail(ErrorKind::DimensionError, "predictive probabilities are univariate");
  std::vector<PredictiveQuery> queries;
  for (const auto& a : above) queries.push_back({resolve_threshold(a, fit), Direction::Above});
  for (const auto& b : below) queries.push_back({resolve_threshold(b, fit), Direction::Below});

  const fs::path dir = fs::path(fit_path).parent_path();
  std::vector<Draw> draws;
  for (const auto& c : fit["chains"]) {
    const Chain ch = read_chain_csv((dir / c["file"].get<std::string>()).string(), n);
    draws.insert(draws.end(), ch.draws.begin(), ch.draws.end());
  }
  Json out;
  out["command"] = "predict";
  out["fit"] = fit_path;
  out["m"] = m;
  Json probs = Json::array();
  for (const auto& q : queries) {
    const PredictiveResult r = predictive_probability(draws, q, m);
    probs.push_back({{"threshold", r.threshold},
                     {"direction", r.direction == Direction::Above ? "above" : "below"},
                     {"probability", r.probability},
                     {"std_error", r.std_error}});
  }
  out["predictive_probs"] = probs;
  std::cout << out.dump(2) << '\n';
  return 0;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    fail(ErrorKind::Usage, "range must look like 1..5");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-canonical fundamental skew-normal distributions: evaluation and Bayesian fitting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  DistOptions dist;
  std::vector<std::string> points;
  auto* density = app.add_subcommand("density", "Evaluate the density at points (JSON lines)");
  add_dist_options(density, dist);
  density->add_option("--at", points, "Point y as comma-separated values (repeatable)")->required();

  auto* cdf = app.add_subcommand("cdf", "Evaluate the cdf at points (JSON lines)");
  add_dist_options(cdf, dist);
  cdf->add_option("--at", points, "Point y as comma-separated values (repeatable)")->required();

  std::vector<std::string> orders;
  auto* moments = app.add_subcommand("moments", "Mixed moments E prod Y_i^t_i (JSON lines)");
  add_dist_options(moments, dist);
  moments->add_option("--order", orders, "Orders t as comma-separated integers (repeatable)")
      ->required();

  std::string m_range = "1..5";
  double shape_delta = 0.4;
  bool shape_table = false;
  auto* shape = app.add_subcommand("shape", "Asymmetry and kurtosis grid for n = 1, both signs of delta");
  shape->add_option("--m-range", m_range, "Range of m, e.g. 1..5");
  shape->add_option("--delta", shape_delta, "Magnitude of the scalar skewness");
  shape->add_flag("--table", shape_table, "Print a text table instead of JSON lines");

  long count = 0;
  std::uint64_t seed = 1;
  std::string sample_out;
  auto* sample_cmd = app.add_subcommand("sample", "Draw from the distribution (CSV)");
  add_dist_options(sample_cmd, dist);
  sample_cmd->add_option("--count", count, "Number of draws")->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", seed, "Random seed");
  sample_cmd->add_option("--out", sample_out, "Output file (default stdout)");

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit LCFUSN_{n,m}(mu, Sigma, delta 1) by MCMC");
  fit_cmd->add_option("--data", fit.data, "CSV of positive observations")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--m", fit.m, "Dimension of the skewing function")->required()->check(CLI::PositiveNumber);
  fit_cmd->add_option("--config", fit.config, "JSON with prior, chain and predictive blocks")->check(CLI::ExistingFile);
  fit_cmd->add_option("--out", fit.out, "Output directory (default $LCFUSN_OUTPUT_DIR or .)");
  fit_cmd->add_option("--seed", fit.seed, "Override the chain seed");
  fit_cmd->add_option("--iterations", fit.iterations, "Override iterations");
  fit_cmd->add_option("--burnin", fit.burnin, "Override burn-in");
  fit_cmd->add_option("--thin", fit.thin, "Override thinning");
  fit_cmd->add_option("--chains", fit.chains, "Override the number of chains");
  fit_cmd->add_option("--ms-draws", fit.ms_draws, "Draws used for DIC/CPO (default 1000)");

  std::vector<std::string> fits;
  bool compare_table = false;
  auto* compare = app.add_subcommand("compare", "DIC / SlnCPO / KS table across fits");
  compare->add_option("--fits", fits, "result.json files")->required()->check(CLI::ExistingFile);
  compare->add_flag("--table", compare_table, "Print a text table instead of JSON");

  std::string fit_path;
  std::vector<std::string> above, below;
  auto* predict = app.add_subcommand("predict", "Posterior predictive exceedance probabilities");
  predict->add_option("--fit", fit_path, "result.json of a univariate fit")->required()->check(CLI::ExistingFile);
  predict->add_option("--above", above, "P(Y > c); c may be a number, 'median' or 'mean'");
  predict->add_option("--below", below, "P(Y < c)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error(ErrorKind::Usage, e.what());
    return static_cast<int>(ErrorClass::Usage);
  }

  try {
    if (*density || *cdf) {
      const LcfusnParams params = build_params(dist);
      std::vector<Vector> ys;
      for (const auto& p : points) {
        ys.push_back(parse_point(p));
        if (ys.back().size() != params.n())
          fail(ErrorKind::DimensionError, "point '" + p + "' has the wrong dimension");
      }
      for (const auto& y : ys) {
        Json line;
        line["y"] = vec_json(y);
        if (*density) {
          const double lp = (y.array() > 0.0).all() ? lcfusn_logpdf(y, params) : -INFINITY;
          line["logpdf"] = lp;
          line["pdf"] = std::exp(lp);
        } else {
          const CdfResult r = lcfusn_cdf(y, params);
          line["cdf"] = r.value;
          line["error_estimate"] = r.error_estimate;
          line["converged"] = r.converged;
        }
        std::cout << line.dump() << '\n';
      }
    } else if (*moments) {
      const LcfusnParams params = build_params(dist);
      for (const auto& o : orders) {
        const Vector t = parse_point(o);
        std::vector<int> ti;
        for (Index i = 0; i < t.size(); ++i) {
          if (t[i] != std::floor(t[i])) fail(ErrorKind::DomainError, "orders must be integers");
          ti.push_back(static_cast<int>(t[i]));
        }
        const MomentOrder order(ti);
        if (order.size() != params.n()) fail(ErrorKind::DimensionError, "order has the wrong length");
        Json line;
        line["order"] = ti;
        line["moment"] = mixed_moment(order, params);
        std::cout << line.dump() << '\n';
      }
    } else if (*shape) {
      const auto [lo, hi] = parse_range(m_range);
      if (lo < 1 || hi < lo) fail(ErrorKind::Usage, "m range must satisfy 1 <= lo <= hi");
      if (shape_table) std::printf("%3s  %8s  %12s  %12s\n", "m", "delta", "asymmetry", "kurtosis");
      for (const double sign : {1.0, -1.0}) {
        for (int m = lo; m <= hi; ++m) {
          const double d = sign * shape_delta;
          const ShapeCoefficients c = shape_coefficients(SkewnessMatrix::validate(Matrix::Constant(1, m, d)));
          if (shape_table) {
            std::printf("%3d  %8.4f  %12.4f  %12.4f\n", m, d, c.skewness, c.kurtosis);
          } else {
            Json line;
            line["m"] = m;
            line["delta"] = d;
            line["skewness"] = c.skewness;
            line["kurtosis"] = c.kurtosis;
            std::cout << line.dump() << '\n';
          }
        }
      }
    } else if (*sample_cmd) {
      const LcfusnParams params = build_params(dist);
      RandomStream rng(seed);
      const Matrix draws = sample(params, count, rng);
      std::vector<std::string> header;
      for (Index i = 0; i < params.n(); ++i) header.push_back("y_" + std::to_string(i + 1));
      std::ostringstream out;
      write_csv(out, header, draws);
      if (sample_out.empty())
        std::cout << out.str();
      else
        write_text(sample_out, out.str());
    } else if (*fit_cmd) {
      return run_fit(fit);
    } else if (*compare) {
      return run_compare(fits, compare_table);
    } else if (*predict) {
      return run_predict(fit_path, above, below);
    }
  } catch (const Error& e) {
    emit_error(e.kind(), e.what());
    return static_cast<int>(classify(e.kind()));
  } catch (const fs::filesystem_error& e) {
    emit_error(ErrorKind::Usage, e.what());
    return static_cast<int>(ErrorClass::Usage);
  } catch (const std::exception& e) {
    emit_error(ErrorKind::NonFinite, e.what());
    return static_cast<int>(ErrorClass::Numeric);
  }
  return 0;
}
