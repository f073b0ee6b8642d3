#pragma once

#include <vector>

#include "lcfusn/distributions.hpp"
#include "lcfusn/inference.hpp"

namespace lcfusn {

// Each OpenMP kernel has a serial twin computing the same values in the same
// order per entry; the mvn_cdf calls they make are deterministic, so the two
// agree bit for bit.

/// T x L matrix of log f(y_i | theta_t) over retained draws.
Matrix loglik_matrix(const DataMatrix& data, const std::vector<Draw>& draws, Index m,
                     const MvnOptions& opts = {kMcmcTol});
Matrix loglik_matrix_serial(const DataMatrix& data, const std::vector<Draw>& draws, Index m,
                            const MvnOptions& opts = {kMcmcTol});

/// Log densities at the rows of `points` (each row one y).
Vector batch_logpdf(const Matrix& points, const LcfusnParams& params, const MvnOptions& opts = {});
Vector batch_logpdf_serial(const Matrix& points, const LcfusnParams& params,
                           const MvnOptions& opts = {});

/// Cdf values at the rows of `points`.
std::vector<CdfResult> batch_cdf(const Matrix& points, const LcfusnParams& params,
                                 const MvnOptions& opts = {});
std::vector<CdfResult> batch_cdf_serial(const Matrix& points, const LcfusnParams& params,
                                        const MvnOptions& opts = {});

/// Parameters of a retained draw.
LcfusnParams draw_params(const Draw& draw, Index m);

}  // namespace lcfusn
