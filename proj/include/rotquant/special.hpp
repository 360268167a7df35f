#pragma once

#include <functional>

namespace rotquant::special {

/// Standard normal density.
double norm_pdf(double z);

/// Standard normal CDF.
double norm_cdf(double z);

/// Inverse of norm_cdf on (0, 1). Acklam's rational approximation refined
/// with one Halley step; absolute error below 1e-14 on (1e-300, 1-1e-16).
double norm_quantile(double p);

/// log Beta(a, b).
double lbeta(double a, double b);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
/// (modified Lentz) to absolute tolerance 1e-12.
double beta_inc_reg(double a, double b, double x);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

} // namespace rotquant::special
