#include "lcfusn/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "lcfusn/error.hpp"

namespace lcfusn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

DataMatrix parse_csv(std::istream& in, Index expected_n, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::vector<long> line_numbers;
  std::string line;
  long line_no = 0;
  bool seen_content = false;
  Index width = expected_n;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_fields(t);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k) numeric &= parse_double(fields[k], values[k]);
    if (!seen_content) {
      seen_content = true;
      if (!numeric) continue;  // header
    }
    if (width == 0) width = static_cast<Index>(fields.size());
    if (static_cast<Index>(fields.size()) != width)
      fail(ErrorKind::ParseError, source + ": line " + std::to_string(line_no) + " has " +
                                      std::to_string(fields.size()) + " columns, expected " +
                                      std::to_string(width));
    for (std::size_t k = 0; k < fields.size(); ++k)
      if (!parse_double(fields[k], values[k]))
        fail(ErrorKind::ParseError, source + ": line " + std::to_string(line_no) + ", column " +
                                        std::to_string(k + 1) + ": not a number '" +
                                        fields[k] + "'");
    rows.push_back(std::move(values));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) fail(ErrorKind::EmptyFile, source + ": no data rows");
  Matrix m(static_cast<Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index j = 0; j < width; ++j) {
      const double v = rows[i][static_cast<std::size_t>(j)];
      if (!(v > 0.0) || !std::isfinite(v))
        fail(ErrorKind::NonPositiveValue,
             source + ": line " + std::to_string(line_numbers[i]) + " (data row " +
                 std::to_string(i + 1) + "), column " + std::to_string(j + 1) +
                 ": value must be finite and positive");
      m(static_cast<Index>(i), j) = v;
    }
  }
  return DataMatrix(std::move(m));
}

DataMatrix read_csv(const std::string& path, Index expected_n) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open " + path);
  return parse_csv(in, expected_n, path);
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values) {
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  if (!header.empty()) out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_number(values(i, j));
    out << '\n';
  }
}

void write_chain_csv(const std::string& path, const Chain& chain, Index n) {
  std::ostringstream out;
  auto names = parameter_names(n);
  names.emplace_back("iteration");
  const Matrix flat = flatten(chain, n);
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  for (Index t = 0; t < flat.rows(); ++t) {
    for (Index j = 0; j < flat.cols(); ++j) out << format_number(flat(t, j)) << ',';
    out << chain.draws[static_cast<std::size_t>(t)].iteration << '\n';
  }
  write_text(path, out.str());
}

Chain read_chain_csv(const std::string& path, Index n) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open " + path);
  const Index p = n + n * (n + 1) / 2 + 1;
  std::string line;
  std::getline(in, line);
  if (static_cast<Index>(split_fields(trim(line)).size()) != p + 1)
    fail(ErrorKind::ParseError, path + ": header does not match dimension " + std::to_string(n));
  Chain chain;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(trim(line));
    std::vector<double> v(f.size());
    bool ok = static_cast<Index>(f.size()) == p + 1;
    for (std::size_t k = 0; ok && k < f.size(); ++k) ok = parse_double(f[k], v[k]);
    if (!ok) fail(ErrorKind::ParseError, path + ": malformed line " + std::to_string(line_no));
    Draw d;
    d.mu = Vector(n);
    Matrix s(n, n);
    Index c = 0;
    for (Index i = 0; i < n; ++i) d.mu[i] = v[static_cast<std::size_t>(c++)];
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) s(i, j) = s(j, i) = v[static_cast<std::size_t>(c++)];
    d.sigma = SymMatrix(s);
    d.delta = v[static_cast<std::size_t>(c++)];
    d.iteration = static_cast<long>(v[static_cast<std::size_t>(c)]);
    chain.draws.push_back(std::move(d));
  }
  return chain;
}

std::uint64_t fnv1a64(const std::string& text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const Json& config) {
  // nlohmann::json (not ordered) keeps object keys sorted, so dump() is canonical.
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(nlohmann::json::parse(config.dump()).dump())));
  return buf;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) fail(ErrorKind::Usage, "expected a matrix (array of rows)");
  if (j.front().is_number()) {
    // A flat list is read as a diagonal.
    Matrix m = Matrix::Zero(static_cast<Index>(j.size()), static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
      m(static_cast<Index>(i), static_cast<Index>(i)) = j[i].get<double>();
    return m;
  }
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Index>(r.size()) != cols)
      fail(ErrorKind::Usage, "matrix rows have different lengths");
    for (Index k = 0; k < cols; ++k) m(i, k) = r[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

namespace {

Vector vector_from_json(const Json& j, Index n) {
  if (j.is_number()) return Vector::Constant(n, j.get<double>());
  if (!j.is_array() || static_cast<Index>(j.size()) != n)
    fail(ErrorKind::DimensionError, "expected a vector of length " + std::to_string(n));
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

SymMatrix sym_from_json(const Json& j, Index n) {
  if (j.is_number()) return SymMatrix(Matrix::Identity(n, n) * j.get<double>());
  const Matrix m = matrix_from_json(j);
  if (m.rows() != n || m.cols() != n)
    fail(ErrorKind::DimensionError, "expected a " + std::to_string(n) + "x" + std::to_string(n) +
                                        " matrix");
  return SymMatrix(m);
}

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

PriorSpec prior_from_json(const Json& j, Index n) {
  try {
    const bool univariate_keys = j.contains("alpha") || j.contains("beta") || j.contains("v");
    if (n == 1 && (univariate_keys || !j.contains("d"))) {
      double mu0 = 0.0;
      if (j.contains("mu0")) mu0 = vector_from_json(j["mu0"], 1)[0];
      return PriorSpec::univariate(mu0, j.value("v", 100.0), j.value("alpha", 0.01),
                                   j.value("beta", 0.01));
    }
    const Vector mu0 = j.contains("mu0") ? vector_from_json(j["mu0"], n) : Vector::Zero(n);
    const SymMatrix sigma_mu =
        j.contains("sigma_mu") ? sym_from_json(j["sigma_mu"], n) : SymMatrix(100.0 * Matrix::Identity(n, n));
    const double d = j.value("d", static_cast<double>(n) + 1.0);
    const SymMatrix big_d =
        j.contains("D") ? sym_from_json(j["D"], n) : SymMatrix(0.01 * Matrix::Identity(n, n));
    return PriorSpec::multivariate(mu0, sigma_mu, d, big_d);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Usage, std::string("prior: ") + e.what());
  }
}

Json prior_to_json(const PriorSpec& prior) {
  Json j;
  if (prior.univariate_form) {
    j["mu0"] = prior.mu0[0];
    j["v"] = prior.sigma_mu(0, 0);
    j["alpha"] = prior.alpha();
    j["beta"] = prior.beta();
  } else {
    j["mu0"] = vector_to_json(prior.mu0);
    j["sigma_mu"] = matrix_to_json(prior.sigma_mu.matrix());
    j["d"] = prior.d;
    j["D"] = matrix_to_json(prior.D.matrix());
  }
  return j;
}

ChainConfig chain_config_from_json(const Json& j) {
  ChainConfig c;
  try {
    c.iterations = j.value("iterations", c.iterations);
    c.burnin = j.value("burnin", c.burnin);
    c.thin = j.value("thin", c.thin);
    c.seed = j.value("seed", c.seed);
    c.n_chains = j.value("n_chains", c.n_chains);
    c.sigma_step = j.value("sigma_step", c.sigma_step);
    c.delta_step = j.value("delta_step", c.delta_step);
    c.adapt_until = j.value("adapt_until", std::min(c.adapt_until, c.burnin));
    c.overdispersed_init = j.value("overdispersed_init", c.overdispersed_init);
    c.expansion_move = j.value("expansion_move", c.expansion_move);
    c.expansion_step = j.value("expansion_step", c.expansion_step);
    c.integrate_mu = j.value("integrate_mu", c.integrate_mu);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Usage, std::string("chain config: ") + e.what());
  }
  return c;
}

Json chain_config_to_json(const ChainConfig& c) {
  Json j;
  j["iterations"] = c.iterations;
  j["burnin"] = c.burnin;
  j["thin"] = c.thin;
  j["seed"] = c.seed;
  j["n_chains"] = c.n_chains;
  j["sigma_step"] = c.sigma_step;
  j["delta_step"] = c.delta_step;
  j["adapt_until"] = c.adapt_until;
  j["overdispersed_init"] = c.overdispersed_init;
  j["expansion_move"] = c.expansion_move;
  j["expansion_step"] = c.expansion_step;
  j["integrate_mu"] = c.integrate_mu;
  return j;
}

Json to_json(const ParameterSummary& s) {
  Json j;
  j["name"] = s.name;
  j["mean"] = s.mean;
  j["sd"] = s.sd;
  j["q025"] = s.q025;
  j["median"] = s.median;
  j["q975"] = s.q975;
  j["hpd_lower"] = s.hpd.lower;
  j["hpd_upper"] = s.hpd.upper;
  j["ess"] = s.ess;
  j["rhat"] = s.rhat;
  return j;
}

Json to_json(const ComparisonReport& r) {
  Json j;
  j["m"] = r.m;
  j["dic"] = r.dic.dic;
  j["p_d"] = r.dic.p_d;
  j["dbar"] = r.dic.dbar;
  j["dhat"] = r.dic.dhat;
  j["slncpo_sum"] = r.cpo.slncpo_sum;
  j["slncpo_mean"] = r.cpo.slncpo_mean;
  if (r.ks) {
    j["ks_dn"] = r.ks->distance;
    j["ks_pvalue"] = r.ks->p_value;
  }
  Json probs = Json::array();
  for (const auto& p : r.predictive) {
    Json q;
    q["threshold"] = p.threshold;
    q["direction"] = p.direction == Direction::Above ? "above" : "below";
    q["probability"] = p.probability;
    q["std_error"] = p.std_error;
    probs.push_back(std::move(q));
  }
  j["predictive_probs"] = std::move(probs);
  return j;
}

Json provenance(std::uint64_t seed, const Json& config) {
  Json j;
  j["seed"] = seed;
  j["config_hash"] = config_hash(config);
  j["version"] = kVersion;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  j["timestamp"] = buf;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Usage, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorKind::Usage, "failed writing " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lcfusn
