#pragma once

#include <cstdint>
#include <vector>

namespace rotquant {

/// Lloyd-Max optimal scalar quantizer for the standard normal source.
/// Centroids are strictly ascending, symmetric about zero; boundaries are
/// the midpoints between adjacent centroids.
struct Codebook {
    int bits = 0;
    std::vector<double> centroids;
    std::vector<double> boundaries;
    double expected_distortion = 0.0; // E[min_k (Z - c_k)^2], Z ~ N(0,1)

    /// The degenerate zero-bit codebook {0}; distortion is Var(Z) = 1.
    static Codebook degenerate_zero();
};

/// Builds the 2^bits-level codebook by solving the Lloyd-Max stationarity
/// conditions (centroid = cell conditional mean, boundary = midpoint) with a
/// damped Newton iteration on closed-form Gaussian cell moments, started from
/// the equiprobable-quantile conditional means and symmetrized each step.
/// Converges quadratically at every width; throws ConvergenceFailure if
/// max_iters is exhausted. `tol` bounds the final max centroid movement.
Codebook lloyd_max_normal(int bits, double tol = 1e-10, int max_iters = 10000);

/// Index of the centroid closest to z (binary search over boundaries);
/// exact boundary hits resolve to the lower index. NaN -> InvalidValue.
int nearest_index(double z, const Codebook& cb);

/// E[min_k (Z - c_k)^2] from per-cell closed-form Gaussian moments.
double expected_distortion(const Codebook& cb);

/// Shared per-process codebook for a bit width (they are deterministic).
const Codebook& cached_codebook(int bits);

} // namespace rotquant
