#include "lcfusn/kernels.hpp"

#include <exception>

namespace lcfusn {

namespace {

template <class Body>
void parallel_rows(Index count, Body body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 8)
  for (Index i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(lcfusn_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

LcfusnParams draw_params(const Draw& draw, Index m) {
  return LcfusnParams(draw.mu, draw.sigma,
                      SkewnessMatrix::parsimonious(draw.delta, draw.mu.size(), m));
}

Matrix loglik_matrix(const DataMatrix& data, const std::vector<Draw>& draws, Index m,
                     const MvnOptions& opts) {
  const auto t = static_cast<Index>(draws.size());
  Matrix out(t, data.rows());
  parallel_rows(t, [&](Index r) {
    const LcfusnParams p = draw_params(draws[static_cast<std::size_t>(r)], m);
    for (Index i = 0; i < data.rows(); ++i)
      out(r, i) = lcfusn_logpdf(data.values().row(i).transpose(), p, opts);
  });
  return out;
}

Matrix loglik_matrix_serial(const DataMatrix& data, const std::vector<Draw>& draws, Index m,
                            const MvnOptions& opts) {
  const auto t = static_cast<Index>(draws.size());
  Matrix out(t, data.rows());
  for (Index r = 0; r < t; ++r) {
    const LcfusnParams p = draw_params(draws[static_cast<std::size_t>(r)], m);
    for (Index i = 0; i < data.rows(); ++i)
      out(r, i) = lcfusn_logpdf(data.values().row(i).transpose(), p, opts);
  }
  return out;
}

Vector batch_logpdf(const Matrix& points, const LcfusnParams& params, const MvnOptions& opts) {
  Vector out(points.rows());
  parallel_rows(points.rows(), [&](Index i) {
    out[i] = lcfusn_logpdf(points.row(i).transpose(), params, opts);
  });
  return out;
}

Vector batch_logpdf_serial(const Matrix& points, const LcfusnParams& params,
                           const MvnOptions& opts) {
  Vector out(points.rows());
  for (Index i = 0; i < points.rows(); ++i)
    out[i] = lcfusn_logpdf(points.row(i).transpose(), params, opts);
  return out;
}

std::vector<CdfResult> batch_cdf(const Matrix& points, const LcfusnParams& params,
                                 const MvnOptions& opts) {
  std::vector<CdfResult> out(static_cast<std::size_t>(points.rows()));
  parallel_rows(points.rows(), [&](Index i) {
    out[static_cast<std::size_t>(i)] = lcfusn_cdf(points.row(i).transpose(), params, opts);
  });
  return out;
}

std::vector<CdfResult> batch_cdf_serial(const Matrix& points, const LcfusnParams& params,
                                        const MvnOptions& opts) {
  std::vector<CdfResult> out;
  out.reserve(static_cast<std::size_t>(points.rows()));
  for (Index i = 0; i < points.rows(); ++i)
    out.push_back(lcfusn_cdf(points.row(i).transpose(), params, opts));
  return out;
}

}  // namespace lcfusn
