#include "rotquant/codebook.hpp"

#include "rotquant/errors.hpp"
#include "rotquant/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>

namespace rotquant {

namespace {

using special::norm_cdf;
using special::norm_pdf;
using special::norm_quantile;

constexpr double kInf = std::numeric_limits<double>::infinity();

double pdf_at(double z) { return std::isinf(z) ? 0.0 : norm_pdf(z); }
double cdf_at(double z) {
    if (z == -kInf) return 0.0;
    if (z == kInf) return 1.0;
    return norm_cdf(z);
}

/// E[Z | a < Z <= b] for Z ~ N(0,1).
double cell_mean(double a, double b) {
    double mass = cdf_at(b) - cdf_at(a);
    if (mass <= 0.0) return 0.5 * (a + b); // numerically empty cell
    return (pdf_at(a) - pdf_at(b)) / mass;
}

/// Integral of (z - c)^2 phi(z) over (a, b).
double cell_distortion(double a, double b, double c) {
    double fa = pdf_at(a);
    double fb = pdf_at(b);
    double mass = cdf_at(b) - cdf_at(a);
    double afa = std::isinf(a) ? 0.0 : a * fa;
    double bfb = std::isinf(b) ? 0.0 : b * fb;
    return (1.0 + c * c) * mass + afa - bfb - 2.0 * c * (fa - fb);
}

std::vector<double> midpoints(const std::vector<double>& c) {
    std::vector<double> b(c.size() - 1);
    for (size_t k = 0; k + 1 < c.size(); ++k) b[k] = 0.5 * (c[k] + c[k + 1]);
    return b;
}

double distortion_of(const std::vector<double>& centroids,
                     const std::vector<double>& boundaries) {
    size_t n = centroids.size();
    double total = 0.0;
    for (size_t k = 0; k < n; ++k) {
        double a = (k == 0) ? -kInf : boundaries[k - 1];
        double b = (k + 1 == n) ? kInf : boundaries[k];
        total += cell_distortion(a, b, centroids[k]);
    }
    return total;
}

} // namespace

Codebook Codebook::degenerate_zero() {
    Codebook cb;
    cb.bits = 0;
    cb.centroids = {0.0};
    cb.expected_distortion = 1.0;
    return cb;
}

Codebook lloyd_max_normal(int bits, double tol, int max_iters) {
    if (bits < 1 || bits > 8) {
        throw InvalidValue("lloyd_max_normal: bits must be in 1..8");
    }
    if (!(tol > 0.0)) throw InvalidValue("lloyd_max_normal: tol must be positive");

    size_t n = size_t{1} << bits;
    std::vector<double> c(n);
    // Equiprobable-cell conditional means.
    for (size_t k = 0; k < n; ++k) {
        double a = (k == 0) ? -kInf : norm_quantile(static_cast<double>(k) / n);
        double b = (k + 1 == n) ? kInf : norm_quantile(static_cast<double>(k + 1) / n);
        c[k] = cell_mean(a, b);
    }

    // Newton's method on the stationarity system g_k(c) = c_k - m_k(c),
    // where m_k is the conditional mean of cell k under midpoint boundaries.
    // The Jacobian is tridiagonal: m_k depends only on c_{k-1}, c_k, c_{k+1}.
    // Because a truncated normal's mean moves less than its endpoints
    // (d m/d a + d m/d b < 1), the system is strictly diagonally dominant, so
    // the Thomas solve below is stable and the iteration converges
    // quadratically from the quantile start; the plain cell-mean iteration
    // slows to a crawl at large widths (rate -> 1), which this avoids.
    std::vector<double> g(n), lower(n), diag(n), upper(n), delta(n), scratch(n);
    double move = kInf;
    for (int iter = 0; iter < max_iters; ++iter) {
        auto bnd = midpoints(c);
        for (size_t k = 0; k < n; ++k) {
            double a = (k == 0) ? -kInf : bnd[k - 1];
            double b = (k + 1 == n) ? kInf : bnd[k];
            double mass = cdf_at(b) - cdf_at(a);
            double m = cell_mean(a, b);
            g[k] = c[k] - m;
            double da = std::isinf(a) ? 0.0 : pdf_at(a) * (m - a) / mass;
            double db = std::isinf(b) ? 0.0 : pdf_at(b) * (b - m) / mass;
            lower[k] = -0.5 * da;
            upper[k] = -0.5 * db;
            diag[k] = 1.0 - 0.5 * (da + db);
        }
        // Thomas algorithm for the tridiagonal solve J * delta = g.
        scratch[0] = upper[0] / diag[0];
        delta[0] = g[0] / diag[0];
        for (size_t k = 1; k < n; ++k) {
            double denom = diag[k] - lower[k] * scratch[k - 1];
            scratch[k] = upper[k] / denom;
            delta[k] = (g[k] - lower[k] * delta[k - 1]) / denom;
        }
        for (size_t k = n - 1; k-- > 0;) delta[k] -= scratch[k] * delta[k + 1];

        // Backtrack if a full step would break the strict centroid ordering.
        double step = 1.0;
        std::vector<double> next(n);
        for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
            bool ok = true;
            for (size_t k = 0; k < n; ++k) {
                next[k] = c[k] - step * delta[k];
                if (!std::isfinite(next[k]) || (k > 0 && next[k] <= next[k - 1])) {
                    ok = false;
                    break;
                }
            }
            if (ok) break;
        }
        // Pin the exact sign symmetry of the optimum.
        for (size_t k = 0; k < n; ++k) {
            size_t m = n - 1 - k;
            if (k < m) {
                double v = 0.5 * (next[k] - next[m]);
                next[k] = v;
                next[m] = -v;
            } else if (k == m) {
                next[k] = 0.0;
            }
        }
        move = 0.0;
        for (size_t k = 0; k < n; ++k) move = std::max(move, std::fabs(next[k] - c[k]));
        c = std::move(next);
        if (move < tol) {
            Codebook cb;
            cb.bits = bits;
            cb.centroids = std::move(c);
            cb.boundaries = midpoints(cb.centroids);
            cb.expected_distortion = distortion_of(cb.centroids, cb.boundaries);
            return cb;
        }
    }
    throw ConvergenceFailure("lloyd_max_normal: no convergence after max_iters", move);
}

int nearest_index(double z, const Codebook& cb) {
    if (std::isnan(z)) throw InvalidValue("nearest_index: NaN input");
    auto it = std::lower_bound(cb.boundaries.begin(), cb.boundaries.end(), z);
    return static_cast<int>(it - cb.boundaries.begin());
}

double expected_distortion(const Codebook& cb) {
    if (cb.centroids.size() == 1) {
        // Single centroid c: E[(Z - c)^2] = 1 + c^2.
        return 1.0 + cb.centroids[0] * cb.centroids[0];
    }
    return distortion_of(cb.centroids, cb.boundaries);
}

const Codebook& cached_codebook(int bits) {
    static std::array<Codebook, 9> cache;
    static std::array<std::once_flag, 9> flags;
    if (bits < 0 || bits > 8) {
        throw InvalidValue("cached_codebook: bits must be in 0..8");
    }
    std::call_once(flags[static_cast<size_t>(bits)], [bits] {
        cache[static_cast<size_t>(bits)] =
            (bits == 0) ? Codebook::degenerate_zero() : lloyd_max_normal(bits);
    });
    return cache[static_cast<size_t>(bits)];
}

} // namespace rotquant
