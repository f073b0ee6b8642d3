#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "lcfusn/error.hpp"
#include "lcfusn/io.hpp"

using namespace lcfusn;
using doctest::Approx;
namespace fs = std::filesystem;

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

DataMatrix parse(const std::string& text, Index n = 0) {
  std::istringstream in(text);
  return parse_csv(in, n);
}

struct Run {
  int status;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(LCFUSN_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t k = std::fread(buf, 1, sizeof buf, p)) out.append(buf, k);
  const int raw = pclose(p);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lcfusn_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("CSV parsing") {
  const DataMatrix a = parse("rain\n2.42\n4.20\n0.54\n");
  REQUIRE(a.rows() == 3);
  CHECK(a.values()(0, 0) == 2.42);
  CHECK(a.values()(1, 0) == 4.20);
  CHECK(a.values()(2, 0) == 0.54);

  const DataMatrix b = parse("1.5,2\n\n3,4.25\n", 2);
  CHECK(b.rows() == 2);
  CHECK(b.values()(1, 1) == 4.25);

  CHECK(kind_of([] { parse("x\n1.0\n0.0\n"); }) == ErrorKind::NonPositiveValue);
  CHECK(kind_of([] { parse("1.0\n-3\n"); }) == ErrorKind::NonPositiveValue);
  CHECK(kind_of([] { parse(""); }) == ErrorKind::EmptyFile);
  CHECK(kind_of([] { parse("header\n"); }) == ErrorKind::EmptyFile);
  CHECK(kind_of([] { parse("1.0\nabc\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse("1.0,2.0\n3.0\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse("1.0\n2.0\n", 2); }) == ErrorKind::ParseError);
  try {
    parse("y\n1.0\n2.0\n0\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("numbers round-trip through text") {
  for (double x : {0.1, 1.0 / 3.0, 2.0e-300, 123456789.123456789, -0.0, 6.02214076e23}) {
    const std::string s = format_number(x);
    CHECK(std::stod(s) == x);
  }
}

TEST_CASE("config hashing is order independent") {
  Json a = {{"seed", 3}, {"prior", {{"alpha", 1.0}, {"beta", 2.0}}}};
  Json b = {{"prior", {{"beta", 2.0}, {"alpha", 1.0}}}, {"seed", 3}};
  CHECK(config_hash(a) == config_hash(b));
  b["seed"] = 4;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("prior and chain config JSON") {
  const PriorSpec p = prior_from_json(Json{{"mu0", 1.5}, {"alpha", 3.0}}, 1);
  CHECK(p.univariate_form);
  CHECK(p.mu0(0) == 1.5);
  CHECK(p.alpha() == 3.0);
  CHECK(p.beta() == 0.01);
  const PriorSpec back = prior_from_json(prior_to_json(p), 1);
  CHECK(back.sigma_mu(0, 0) == p.sigma_mu(0, 0));
  CHECK(back.d == p.d);

  const PriorSpec mv = prior_from_json(Json::object(), 2);
  CHECK(mv.d == 3.0);
  CHECK(mv.sigma_mu(1, 1) == 100.0);

  ChainConfig c;
  c.iterations = 1234;
  c.seed = 99;
  const ChainConfig r = chain_config_from_json(chain_config_to_json(c));
  CHECK(r.iterations == 1234);
  CHECK(r.seed == 99);
  CHECK(r.burnin == c.burnin);
  CHECK(r.integrate_mu == c.integrate_mu);
  CHECK(r.expansion_step == c.expansion_step);

  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  CHECK(matrix_from_json(matrix_to_json(m)) == m);
}

TEST_CASE("chain CSV round-trip") {
  Chain c;
  Matrix s(2, 2);
  s << 0.3, 0.1, 0.1, 0.7;
  for (long it = 1; it <= 3; ++it)
    c.draws.push_back({Vector::Constant(2, 0.1 * static_cast<double>(it)) / 3.0, SymMatrix(s),
                       -0.2 / static_cast<double>(it), it * 5});
  const fs::path path = scratch("chain.csv");
  write_chain_csv(path.string(), c, 2);
  const Chain r = read_chain_csv(path.string(), 2);
  REQUIRE(r.draws.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(r.draws[k].mu == c.draws[k].mu);
    CHECK(r.draws[k].sigma.matrix() == c.draws[k].sigma.matrix());
    CHECK(r.draws[k].delta == c.draws[k].delta);
    CHECK(r.draws[k].iteration == c.draws[k].iteration);
  }
  CHECK(read_text(path.string()).rfind("mu_1,mu_2,sigma_1_1,sigma_1_2,sigma_2_2,delta,iteration", 0) == 0);
}

TEST_CASE("provenance fields") {
  const Json p = provenance(7, Json{{"a", 1}});
  CHECK(p["seed"] == 7);
  CHECK(p["version"] == kVersion);
  CHECK(p.contains("config_hash"));
  CHECK(p.contains("timestamp"));
}

TEST_CASE("CLI exit codes") {
  CHECK(run_cli("density --m 1 --at 1.0").status == 0);
  CHECK(run_cli("density --m 1").status == 1);
  CHECK(run_cli("bogus").status == 1);
  CHECK(run_cli("density --m 1 --mu 0,0 --at 1").status == 1);
  CHECK(run_cli("density --m 1 --delta 2 --at 1").status == 3);

  const fs::path bad = scratch("bad.csv");
  write_text(bad.string(), "y\n1.0\n0.0\n");
  CHECK(run_cli("fit --m 1 --iterations 20 --burnin 5 --data " + bad.string()).status == 2);
}

TEST_CASE("CLI density output") {
  const Run r = run_cli("density --m 1 --at 1.0");
  REQUIRE(r.status == 0);
  const Json j = Json::parse(r.out.substr(0, r.out.find('\n')));
  // Standard log-normal at 1.
  CHECK(j["logpdf"].get<double>() ==
        Approx(-0.5 * std::log(2.0 * 3.14159265358979323846)).epsilon(1e-12));
}

TEST_CASE("CLI sampling is deterministic") {
  const Run a = run_cli("sample --m 2 --delta 0.3 --count 50 --seed 4");
  const Run b = run_cli("sample --m 2 --delta 0.3 --count 50 --seed 4");
  const Run c = run_cli("sample --m 2 --delta 0.3 --count 50 --seed 5");
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  std::istringstream in(a.out);
  CHECK(parse_csv(in).rows() == 50);
}
