// Serial vs OpenMP kernels on the workloads the fit command runs.
#include <benchmark/benchmark.h>

#include "lcfusn/kernels.hpp"

using namespace lcfusn;

namespace {

std::vector<Draw> make_draws(std::size_t count) {
  RandomStream rng(1);
  std::vector<Draw> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back({Vector::Constant(1, 1.0 + 0.05 * rng.normal()),
                   SymMatrix(Matrix::Constant(1, 1, 0.16 * std::exp(0.1 * rng.normal()))),
                   -0.3 + 0.05 * rng.normal(), static_cast<long>(k)});
  return out;
}

DataMatrix make_data(Index rows) {
  RandomStream rng(2);
  return simulate_augmented(Vector::Constant(1, 1.0), SymMatrix(Matrix::Constant(1, 1, 0.16)),
                            -0.5, 2, rows, rng)
      .data;
}

template <bool Parallel>
void loglik(benchmark::State& state) {
  const DataMatrix y = make_data(200);
  const std::vector<Draw> d = make_draws(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Matrix ll = Parallel ? loglik_matrix(y, d, state.range(1)) : loglik_matrix_serial(y, d, state.range(1));
    benchmark::DoNotOptimize(ll.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
}

template <bool Parallel>
void cdf(benchmark::State& state) {
  const LcfusnParams p(Vector::Zero(2), SymMatrix(Matrix::Identity(2, 2)),
                       SkewnessMatrix::parsimonious(0.3, 2, state.range(0)));
  RandomStream rng(3);
  Matrix pts(256, 2);
  for (Index i = 0; i < pts.size(); ++i) pts.data()[i] = std::exp(rng.normal());
  for (auto _ : state) {
    auto r = Parallel ? batch_cdf(pts, p) : batch_cdf_serial(pts, p);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}

}  // namespace

BENCHMARK(loglik<false>)->Args({100, 2})->Args({100, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(loglik<true>)->Args({100, 2})->Args({100, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(cdf<false>)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(cdf<true>)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
