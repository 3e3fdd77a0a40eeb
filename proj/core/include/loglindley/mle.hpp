#pragma once

#include <array>
#include <cstddef>

#include "loglindley/distribution.hpp"
#include "loglindley/stats.hpp"

namespace loglindley::mle {

/// Symmetric 2x2 matrix in (sigma, pi) order.
struct SymMatrix2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double determinant() const noexcept { return xx * yy - xy * xy; }
  /// Throws std::domain_error when the matrix is singular.
  SymMatrix2 inverse() const;
  SymMatrix2 scaled(double c) const noexcept { return {c * xx, c * xy, c * yy}; }
};

/// Fisher (expected) or observed information, i.e. a negated Hessian.
using InfoMatrix = SymMatrix2;
using Covariance = SymMatrix2;

/// sum_i log f(x_i); -infinity when some density factor vanishes.
double log_likelihood(const Params& p, const Sample& s);

/// Gradient of log_likelihood, (d/dsigma, d/dpi).
std::array<double, 2> score(const Params& p, const Sample& s);

/// Negated Hessian of log_likelihood at p.
InfoMatrix observed_info(const Params& p, const Sample& s);

/// g(sigma, pi, k) = int_0^inf v^k exp(-sigma v) / (pi + sigma (1 - pi) v) dv
///                 = k! exp(z) E_{k+1}(z) / (sigma^(k+1) (1 - pi)),  z = pi / (1 - pi).
/// Defined for 0 < pi < 1 and k in {0, 1, 2}.
double g_integral(const Params& p, int k);

/// Expected information for an iid sample of size m:
///   I11 = m / sigma^2 + m sigma (1 - pi)^2 g2
///   I12 = m sigma g1
///   I22 = m sigma (g0 - 2 sigma g1 + sigma^2 g2)
InfoMatrix fisher_info(const Params& p, std::size_t m);

struct FitOptions {
  double level = 0.95;
  int max_iterations = 2000;
  double f_rel_tol = 1e-10;
  double diameter_tol = 1e-8;
  /// Estimates of pi closer than this to 0 or 1 are reported on the boundary.
  double boundary_tol = 1e-8;
  /// pi used for the covariance when the estimate sits on the boundary.
  double boundary_clip = 1e-4;
};

struct FitResultML {
  Params estimate{1.0, 1.0};
  Covariance covariance;
  Interval ci_sigma;
  Interval ci_pi_raw;
  /// ci_pi_raw clamped to [0, 1].
  Interval ci_pi;
  double loglik = 0.0;
  bool converged = false;
  bool boundary = false;
  int iterations = 0;
  std::size_t m = 0;
  double level = 0.95;
};

/// Maximum-likelihood fit over sigma > 0, 0 <= pi <= 1 with Wald intervals
/// from the expected information. Requires at least two observations that
/// are not all equal (std::invalid_argument otherwise). Non-convergence is
/// reported through FitResultML::converged rather than thrown.
FitResultML fit(const Sample& s, const FitOptions& options = {});

}  // namespace loglindley::mle
