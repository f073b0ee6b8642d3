#include <doctest.h>

#include <omp.h>

#include "lcfusn/kernels.hpp"

using namespace lcfusn;

namespace {

std::vector<Draw> draws(std::size_t count, Index n) {
  RandomStream rng(17);
  std::vector<Draw> out;
  for (std::size_t k = 0; k < count; ++k) {
    Matrix s = Matrix::Identity(n, n) * (0.3 + 0.1 * rng.uniform());
    if (n > 1) s(0, 1) = s(1, 0) = 0.05;
    out.push_back({Vector::Constant(n, 0.2 * rng.normal()), SymMatrix(s), 0.4 * rng.uniform() - 0.2,
                   static_cast<long>(k)});
  }
  return out;
}

Matrix data(Index rows, Index n) {
  RandomStream rng(3);
  Matrix y(rows, n);
  for (Index i = 0; i < y.size(); ++i) y.data()[i] = std::exp(0.5 * rng.normal());
  return y;
}

}  // namespace

TEST_CASE("parallel log-likelihood matrix equals the serial one") {
  omp_set_num_threads(4);
  for (Index n : {1, 2}) {
    for (Index m : {1, 3}) {
      const DataMatrix y(data(25, n));
      const std::vector<Draw> d = draws(30, n);
      const Matrix a = loglik_matrix(y, d, m);
      const Matrix b = loglik_matrix_serial(y, d, m);
      CHECK(a.rows() == 30);
      CHECK(a.cols() == 25);
      CHECK(a == b);
    }
  }
}

TEST_CASE("parallel batch density and cdf equal the serial ones") {
  omp_set_num_threads(4);
  Matrix delta(2, 2);
  delta << 0.3, -0.2, 0.1, 0.4;
  Matrix s(2, 2);
  s << 0.5, 0.2, 0.2, 0.8;
  const LcfusnParams p(Vector::Zero(2), SymMatrix(s), SkewnessMatrix::validate(delta));
  const Matrix pts = data(40, 2);
  CHECK(batch_logpdf(pts, p) == batch_logpdf_serial(pts, p));
  const auto a = batch_cdf(pts, p);
  const auto b = batch_cdf_serial(pts, p);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == b[i].value);
    CHECK(a[i].error_estimate == b[i].error_estimate);
  }
}

TEST_CASE("draw parameters use the scalar skewness") {
  const Draw d{Vector::Constant(2, 0.1), SymMatrix(Matrix::Identity(2, 2)), -0.25, 0};
  const LcfusnParams p = draw_params(d, 3);
  CHECK(p.m() == 3);
  CHECK((p.delta().matrix().array() == -0.25).all());
}
