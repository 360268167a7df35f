#include "rotquant/analysis.hpp"

#include "rotquant/codebook.hpp"
#include "rotquant/errors.hpp"
#include "rotquant/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace rotquant::analysis {

namespace {

using std::numbers::pi;

constexpr double kInf = std::numeric_limits<double>::infinity();

// \int_{-pi/2}^{pi/2} cos^m(a) da = sqrt(pi) * Gamma((m+1)/2) / Gamma(m/2 + 1).
double cos_power_norm(int m) {
    return std::sqrt(pi) *
           std::exp(std::lgamma((m + 1) / 2.0) - std::lgamma(m / 2.0 + 1.0));
}

// Probability the dim-n coordinate lands in (lo, hi).
double law_mass(int n, double lo, double hi) {
    return coord_cdf(n, hi) - coord_cdf(n, lo);
}

// E[z^2 * 1{lo < z < hi}] under the dim-n coordinate law, using
// sin^2 cos^m = cos^m - cos^{m+2}: the piece equals n*dG_n - (n-1)*dG_{n+2}
// where dG_k is the mass the dim-k law puts on the same angular interval.
double law_second_moment(int n, double lo, double hi) {
    double rn = std::sqrt(static_cast<double>(n));
    double slo = std::clamp(lo / rn, -1.0, 1.0);
    double shi = std::clamp(hi / rn, -1.0, 1.0);
    double rn2 = std::sqrt(n + 2.0);
    double g_n = law_mass(n, lo, hi);
    double g_n2 = coord_cdf(n + 2, rn2 * shi) - coord_cdf(n + 2, rn2 * slo);
    return n * g_n - (n - 1) * g_n2;
}

// E[(s*w) * c(s*w)] for w following the dim-n coordinate law; the codeword is
// constant on each scaled cell, and \int sin(b) cos^m(b) db is elementary.
double scaled_mean_response(const Codebook& cb, double s, int n) {
    if (s < 1e-300) return 0.0;
    int m = n - 2;
    double rn = std::sqrt(static_cast<double>(n));
    double nm = cos_power_norm(m);
    size_t cells = cb.centroids.size();
    double total = 0.0;
    for (size_t i = 0; i < cells; ++i) {
        double lo_t = (i == 0) ? -kInf : cb.boundaries[i - 1];
        double hi_t = (i + 1 == cells) ? kInf : cb.boundaries[i];
        double lo = std::max(lo_t / s, -rn);
        double hi = std::min(hi_t / s, rn);
        if (!(lo < hi)) continue;
        double blo = std::asin(std::clamp(lo / rn, -1.0, 1.0));
        double bhi = std::asin(std::clamp(hi / rn, -1.0, 1.0));
        double seg = (std::pow(std::cos(blo), m + 1) -
                      std::pow(std::cos(bhi), m + 1)) /
                     (m + 1);
        total += cb.centroids[i] * rn * seg;
    }
    return s * total / nm;
}

// E[z1 c(z1) z2 c(z2)] over the radius-sqrt(d) sphere. Conditioned on z1 the
// second coordinate is s*w with s = sqrt((d - z1^2)/(d - 1)) and w following
// the dim-(d-1) coordinate law, so only this outer integral needs quadrature.
double cross_moment(const Codebook& cb, int d) {
    double rd = std::sqrt(static_cast<double>(d));
    int m = d - 2;
    double nm = cos_power_norm(m);

    auto inner = [&](double z1) -> double {
        if (d == 2) {
            double w = std::sqrt(std::max(0.0, d - z1 * z1));
            return w * cb.centroids[static_cast<size_t>(nearest_index(w, cb))];
        }
        double s2 = (d - z1 * z1) / (d - 1.0);
        if (s2 <= 0.0) return 0.0;
        return scaled_mean_response(cb, std::sqrt(s2), d - 1);
    };
    auto f = [&](double alpha) -> double {
        double z1 = rd * std::sin(alpha);
        double c1 = cb.centroids[static_cast<size_t>(nearest_index(z1, cb))];
        return z1 * c1 * inner(z1) * std::pow(std::cos(alpha), m) / nm;
    };

    // Split at the angular images of the codeword cells and at the points
    // where a scaled cell boundary leaves the conditional law's support.
    // Also seed points at the law's own concentration scale, z1 = O(1):
    // for large d the weight cos^m(alpha) is a spike of width ~1/sqrt(d)
    // around zero that plain bisection of [-pi/2, pi/2] never samples.
    std::vector<double> pts{-pi / 2, pi / 2};
    for (double u : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0}) {
        if (u < rd) {
            double a = std::asin(u / rd);
            pts.push_back(a);
            pts.push_back(-a);
        }
    }
    for (double t : cb.boundaries) {
        if (std::fabs(t) < rd) pts.push_back(std::asin(t / rd));
        double kink2 = d - t * t;
        if (kink2 > 0.0 && kink2 < static_cast<double>(d)) {
            double a = std::asin(std::sqrt(kink2) / rd);
            pts.push_back(a);
            pts.push_back(-a);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    double piece_tol =
        std::max(5e-14, 1e-10 / static_cast<double>(pts.size() - 1));
    double total = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] - pts[i] < 1e-15) continue;
        total += special::adaptive_simpson(f, pts[i], pts[i + 1], piece_tol);
    }
    return total;
}

} // namespace

double coord_cdf(int d, double t) {
    if (d < 2) throw InvalidDimension("coord_cdf: dimension must be >= 2");
    double rd = std::sqrt(static_cast<double>(d));
    if (t <= -rd) return 0.0;
    if (t >= rd) return 1.0;
    double half = (d - 1) / 2.0;
    return special::beta_inc_reg(half, half, (t / rd + 1.0) / 2.0);
}

double exact_vnmse_1bit_biased(int d) {
    if (d < 1) throw InvalidDimension("exact_vnmse_1bit_biased: d must be >= 1");
    return (1.0 - 2.0 / pi) * (1.0 - 1.0 / d);
}

double turboquant_mse_bound(int b) {
    if (b < 1) throw InvalidValue("turboquant_mse_bound: b must be >= 1");
    return std::sqrt(3.0) * pi / 2.0 * std::pow(4.0, -b);
}

double asymptotic_vnmse(MethodKind method) {
    method.validate();
    if (method.tag == MethodTag::Qjl) return pi / 2.0;
    if (method.tag == MethodTag::EdenUnbiased && method.bits == 1) {
        return pi / 2.0 - 1.0;
    }
    throw Unsupported("asymptotic_vnmse: no closed-form limit for " +
                      method.name());
}

double expected_vnmse_biased(int b, int d) {
    if (b < 1 || b > 8) throw InvalidValue("expected_vnmse_biased: b must be in 1..8");
    if (d < 2) throw InvalidDimension("expected_vnmse_biased: d must be >= 2");
    const Codebook& cb = cached_codebook(b);
    double rd = std::sqrt(static_cast<double>(d));

    // Per-coordinate moments of the codeword response under the exact law.
    double p = 0.0;  // E[c(z)^2]
    double m2 = 0.0; // E[(z c(z))^2]
    size_t cells = cb.centroids.size();
    for (size_t i = 0; i < cells; ++i) {
        double lo = std::max(i == 0 ? -kInf : cb.boundaries[i - 1], -rd);
        double hi = std::min(i + 1 == cells ? kInf : cb.boundaries[i], rd);
        if (!(lo < hi)) continue;
        double c2 = cb.centroids[i] * cb.centroids[i];
        p += c2 * law_mass(d, lo, hi);
        m2 += c2 * law_second_moment(d, lo, hi);
    }
    double x = cross_moment(cb, d);

    // vNMSE of the least-squares scale = 1 - E[<z,c>^2 / ||c||^2] / d with the
    // codeword energy replaced by its mean (exact at b=1 where it is constant).
    return 1.0 - (m2 + (d - 1) * x) / (d * p);
}

} // namespace rotquant::analysis
