#include "lcfusn/mvn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "lcfusn/error.hpp"
#include "lcfusn/normal.hpp"

namespace lcfusn {
namespace {

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre make_gauss_legendre(int n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussLegendre& rule_for(double abs_r) {
  static const GaussLegendre gl6 = make_gauss_legendre(6);
  static const GaussLegendre gl12 = make_gauss_legendre(12);
  static const GaussLegendre gl20 = make_gauss_legendre(20);
  if (abs_r < 0.3) return gl6;
  if (abs_r < 0.75) return gl12;
  return gl20;
}

// Upper orthant P(X > dh, Y > dk) by Drezner-Wesolowsky / Genz quadrature.
double bvn_upper(double dh, double dk, double r) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const GaussLegendre& gl = rule_for(std::abs(r));
  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double sn = std::sin(0.5 * asr * (gl.nodes[i] + 1.0));
      bvn += gl.weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * two_pi) + norm_cdf(-h) * norm_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-0.5 * (bs / as + hk)) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-0.5 * hk) * std::sqrt(two_pi) * norm_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double xs = std::pow(a * (gl.nodes[i] + 1.0), 2);
      const double rs = std::sqrt(1.0 - xs);
      bvn += a * gl.weights[i] *
             (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
              std::exp(-0.5 * (bs / xs + hk)) * (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + norm_cdf(-std::max(h, k));
  bvn = -bvn;
  if (k > h) {
    bvn += (h < 0.0) ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
  }
  return bvn;
}

double clamp01(double p) noexcept { return std::min(1.0, std::max(0.0, p)); }

constexpr std::array<double, 11> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31};

// Separation-of-variables integrand after prioritized Cholesky.
class SovIntegrand {
 public:
  SovIntegrand(const Matrix& corr, const Vector& bounds) : dim_(bounds.size()) {
    prioritize(corr, bounds);
  }

  Eigen::Index integration_dim() const noexcept { return dim_ - 1; }

  double operator()(const double* w, double* y) const noexcept {
    double e = norm_cdf(b_(0) / chol_(0, 0));
    double f = e;
    for (Eigen::Index i = 1; i < dim_; ++i) {
      y[i - 1] = norm_quantile_unchecked(w[i - 1] * e);
      double t = 0.0;
      for (Eigen::Index l = 0; l < i; ++l) t += chol_(i, l) * y[l];
      e = norm_cdf((b_(i) - t) / chol_(i, i));
      f *= e;
      if (f == 0.0) return 0.0;
    }
    return f;
  }

 private:
  void prioritize(const Matrix& corr, const Vector& bounds) {
    Matrix r = corr;
    b_ = bounds;
    chol_ = Matrix::Zero(dim_, dim_);
    Vector expected = Vector::Zero(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
      Eigen::Index best = i;
      double best_p = 2.0;
      for (Eigen::Index j = i; j < dim_; ++j) {
        double s2 = r(j, j);
        double t = 0.0;
        for (Eigen::Index l = 0; l < i; ++l) {
          s2 -= chol_(j, l) * chol_(j, l);
          t += chol_(j, l) * expected(l);
        }
        const double s = std::sqrt(std::max(s2, 1e-300));
        const double p = norm_cdf((b_(j) - t) / s);
        if (p < best_p) {
          best_p = p;
          best = j;
        }
      }
      if (best != i) {
        r.row(i).swap(r.row(best));
        r.col(i).swap(r.col(best));
        std::swap(b_(i), b_(best));
        chol_.row(i).swap(chol_.row(best));
      }
      double s2 = r(i, i);
      for (Eigen::Index l = 0; l < i; ++l) s2 -= chol_(i, l) * chol_(i, l);
      const double d = std::sqrt(std::max(s2, 1e-300));
      chol_(i, i) = d;
      for (Eigen::Index j = i + 1; j < dim_; ++j) {
        double s = r(j, i);
        for (Eigen::Index l = 0; l < i; ++l) s -= chol_(j, l) * chol_(i, l);
        chol_(j, i) = s / d;
      }
      double t = 0.0;
      for (Eigen::Index l = 0; l < i; ++l) t += chol_(i, l) * expected(l);
      const double bi = (b_(i) - t) / d;
      const double p = norm_cdf(bi);
      expected(i) = p > 1e-300 ? -norm_pdf(bi) / p : bi;
    }
  }

  Eigen::Index dim_;
  Matrix chol_;
  Vector b_;
};

// Gauss-Kronrod 7/15 abscissae on [-1, 1] (non-negative half) and weights.
constexpr double kGkNodes[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                0.207784955007898467600689403773245, 0.0};
constexpr double kKronrodWeights[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                       0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                       0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                       0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kGaussWeights[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                     0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
double adaptive_gk(const F& f, double a, double b, double tol, int depth, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double kronrod = kKronrodWeights[7] * f(c);
  double gauss = kGaussWeights[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const double v = f(c - h * kGkNodes[i]) + f(c + h * kGkNodes[i]);
    kronrod += kKronrodWeights[i] * v;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * v;
  }
  kronrod *= h;
  gauss *= h;
  const double e = std::abs(kronrod - gauss);
  if (e <= tol || depth == 0) {
    err += e;
    return kronrod;
  }
  return adaptive_gk(f, a, c, 0.5 * tol, depth - 1, err) +
         adaptive_gk(f, c, b, 0.5 * tol, depth - 1, err);
}

// P(X <= b) for a standardized normal vector of dimension 3 or 4: condition
// on the most restrictive coordinate and integrate the lower-dimensional cdf
// against the normal weight.
double cdf_by_conditioning(const Vector& b, const Matrix& corr, double tol, double& err) {
  const Eigen::Index k = b.size();
  Eigen::Index c = 0;
  for (Eigen::Index i = 1; i < k; ++i)
    if (b(i) < b(c)) c = i;
  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < k; ++i)
    if (i != c) rest.push_back(i);
  const auto r = static_cast<Eigen::Index>(rest.size());
  Vector load(r), scale(r);
  Matrix sub(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    load(i) = corr(rest[i], c);
    scale(i) = std::sqrt(std::max(1.0 - load(i) * load(i), 1e-300));
  }
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j)
      sub(i, j) = i == j ? 1.0
                         : (corr(rest[i], rest[j]) - load(i) * load(j)) / (scale(i) * scale(j));
  Vector bounds(r);
  Vector base(r);
  for (Eigen::Index i = 0; i < r; ++i) base(i) = b(rest[i]);
  double inner_err = 0.0;
  // Beyond |x| = 9 the normal weight is below 1e-18.
  constexpr double kCut = 9.0;
  auto integrand = [&](double x) {
    for (Eigen::Index i = 0; i < r; ++i) bounds(i) = (base(i) - load(i) * x) / scale(i);
    const double w = norm_pdf(x);
    if (r == 2) return w * bvn_cdf(bounds(0), bounds(1), sub(0, 1));
    return w * cdf_by_conditioning(bounds, sub, 0.1 * tol, inner_err);
  };
  const double upper = std::min(b(c), kCut);
  if (upper <= -kCut) return 0.0;
  const double value = adaptive_gk(integrand, -kCut, upper, tol, 30, err);
  err += inner_err / 15.0;
  return value;
}

CdfResult lattice_integrate(const SovIntegrand& f, const MvnOptions& opts, RandomStream& rng) {
  const Eigen::Index s = f.integration_dim();
  const int shifts = std::max(opts.shifts, 2);
  std::vector<double> q(s);
  for (Eigen::Index j = 0; j < s; ++j) q[j] = std::sqrt(kPrimes[j]) - std::floor(std::sqrt(kPrimes[j]));

  std::vector<double> shift(s), w(s), wa(s), y(s + 1);
  std::vector<double> shift_means(shifts);
  CdfResult result;
  long n = 64;
  while (true) {
    for (int k = 0; k < shifts; ++k) {
      for (auto& v : shift) v = rng.uniform();
      double sum = 0.0;
      for (long j = 1; j <= n; ++j) {
        for (Eigen::Index d = 0; d < s; ++d) {
          double x = static_cast<double>(j) * q[d] + shift[d];
          x -= std::floor(x);
          w[d] = std::abs(2.0 * x - 1.0);
          wa[d] = 1.0 - w[d];
        }
        sum += f(w.data(), y.data()) + f(wa.data(), y.data());
      }
      shift_means[k] = sum / (2.0 * static_cast<double>(n));
    }
    result.points_used += 2L * n * shifts;
    double mean = 0.0;
    for (double m : shift_means) mean += m;
    mean /= shifts;
    double var = 0.0;
    for (double m : shift_means) var += (m - mean) * (m - mean);
    var /= static_cast<double>(shifts) * (shifts - 1);
    result.value = clamp01(mean);
    result.error_estimate = std::max(3.0 * std::sqrt(var), 1e-15);
    if (result.error_estimate <= opts.tol) {
      result.converged = true;
      break;
    }
    if (result.points_used + 4L * n * shifts > opts.max_points) {
      result.converged = false;
      break;
    }
    n *= 2;
  }
  return result;
}

}  // namespace

double bvn_cdf(double h, double k, double rho) noexcept {
  if (std::isnan(h) || std::isnan(k)) return std::numeric_limits<double>::quiet_NaN();
  if (h <= -kInfinity || k <= -kInfinity) return 0.0;
  if (h >= kInfinity) return k >= kInfinity ? 1.0 : norm_cdf(k);
  if (k >= kInfinity) return norm_cdf(h);
  return clamp01(bvn_upper(-h, -k, rho));
}

CdfResult mvn_cdf(const Vector& upper, const SymMatrix& cov, const MvnOptions& opts,
                  RandomStream& rng) {
  const Eigen::Index n = upper.size();
  if (n == 0 || cov.dim() != n) {
    fail(ErrorKind::DimensionError, "mvn_cdf: bound and covariance dimensions differ");
  }
  if (n > kMaxMvnDim) {
    std::ostringstream msg;
    msg << "mvn_cdf: dimension " << n << " exceeds the supported maximum " << kMaxMvnDim;
    fail(ErrorKind::DimensionTooLarge, msg.str());
  }
  cholesky(cov);  // validates positive definiteness of the full matrix
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(upper(i))) fail(ErrorKind::NonFinite, "mvn_cdf: NaN bound");
    if (upper(i) <= -kInfinity) return CdfResult{0.0, 0.0, 0, true};
    if (upper(i) < kInfinity) keep.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(keep.size());
  if (k == 0) return CdfResult{1.0, 0.0, 0, true};

  Vector b(k);
  Matrix corr(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double si = std::sqrt(cov(keep[i], keep[i]));
    b(i) = upper(keep[i]) / si;
    for (Eigen::Index j = 0; j < k; ++j) {
      corr(i, j) = cov(keep[i], keep[j]) / (si * std::sqrt(cov(keep[j], keep[j])));
    }
  }
  if (k == 1) return CdfResult{norm_cdf(b(0)), 1e-15, 1, true};
  if (k == 2) return CdfResult{bvn_cdf(b(0), b(1), corr(0, 1)), 1e-14, 1, true};

  if (k <= 4) {
    double err = 0.0;
    const double value = clamp01(cdf_by_conditioning(b, corr, k == 3 ? 1e-13 : 1e-12, err));
    return CdfResult{value, std::max(err, 1e-14), 0, true};
  }

  const SovIntegrand integrand(corr, b);
  return lattice_integrate(integrand, opts, rng);
}

CdfResult mvn_cdf(const Vector& upper, const SymMatrix& cov, const MvnOptions& opts) {
  RandomStream rng(0x6C63667573ULL, 0);
  return mvn_cdf(upper, cov, opts, rng);
}

double mvn_logpdf(const Vector& x, const Vector& mean, const SymMatrix& cov) {
  if (x.size() != mean.size() || x.size() != cov.dim()) {
    fail(ErrorKind::DimensionError, "mvn_logpdf: dimension mismatch");
  }
  const Matrix L = cholesky(cov);
  const Vector z = L.triangularView<Eigen::Lower>().solve(x - mean);
  return -0.5 * z.squaredNorm() - 0.5 * log_det_from_cholesky(L) -
         static_cast<double>(x.size()) * kLogSqrt2Pi;
}

}  // namespace lcfusn
