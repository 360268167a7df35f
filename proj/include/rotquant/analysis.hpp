#pragma once

#include "rotquant/quantizer.hpp"

namespace rotquant::analysis {

/// CDF of one coordinate of a uniform point on the radius-sqrt(d) sphere:
/// P(sqrt(d)*u_1 <= t). ((u_1+1)/2 is Beta((d-1)/2, (d-1)/2); the law has
/// mean 0, variance 1, support [-sqrt(d), sqrt(d)], and tends to N(0,1).)
double coord_cdf(int d, double t);

/// Closed-form vNMSE of the 1-bit least-squares (biased) sign quantizer
/// under an exact uniform rotation: (1 - 2/pi)(1 - 1/d).
double exact_vnmse_1bit_biased(int d);

/// Worst-case MSE guarantee of the unit-scale quantile ladder:
/// (sqrt(3)*pi/2) * 4^-b.
double turboquant_mse_bound(int b);

/// Large-d vNMSE limits for the 1-bit estimators: pi/2 - 1 for the
/// unbiased sign quantizer, pi/2 for the Gaussian-projection sign sketch.
/// Other methods have no closed-form limit here -> Unsupported.
double asymptotic_vnmse(MethodKind method);

/// Semi-analytic expected vNMSE of the least-squares estimator at b bits
/// and dimension d: integrates the codebook response against the exact
/// sphere-coordinate law, including the pairwise cross-coordinate moment,
/// but replaces the random codeword energy by its mean (exact at b=1,
/// a reference curve for b >= 2).
double expected_vnmse_biased(int b, int d);

} // namespace rotquant::analysis
