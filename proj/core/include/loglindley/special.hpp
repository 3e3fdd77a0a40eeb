#pragma once

// Scalar special functions used by the log-Lindley density, its quantile
// function and the expected information matrix.

namespace loglindley::special {

/// Lower branch W_{-1} of the Lambert W function on [-1/e, 0).
/// Returns w <= -1 with w * exp(w) == x. Throws std::domain_error outside
/// the branch domain.
double lambert_w_m1(double x);

/// W_{-1}(-exp(log_neg_x)), for arguments too small to represent directly.
/// Requires log_neg_x <= -1 (the branch point -1/e has log(-x) == -1).
double lambert_w_m1_from_log(double log_neg_x);

/// Generalized exponential integral E_n(z) = int_1^inf exp(-t z) / t^n dt
/// for n in {0, 1, 2, 3} and z > 0.
double exp_integral(int n, double z);

/// exp(z) * E_n(z), evaluated without forming exp(z) (no overflow for
/// large z).
double exp_integral_scaled(int n, double z);

double log_gamma(double z);
double log_beta(double a, double b);

}  // namespace loglindley::special
