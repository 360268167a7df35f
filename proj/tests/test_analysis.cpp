#include "rotquant/analysis.hpp"

#include "rotquant/codebook.hpp"
#include "rotquant/errors.hpp"
#include "rotquant/special.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace rotquant;
using std::numbers::pi;

TEST_CASE("coordinate CDF: symmetry, support, closed-form points") {
    for (int d : {2, 3, 16, 300}) {
        CHECK(analysis::coord_cdf(d, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
        double rd = std::sqrt(static_cast<double>(d));
        CHECK(analysis::coord_cdf(d, -rd - 0.1) == 0.0);
        CHECK(analysis::coord_cdf(d, rd + 0.1) == 1.0);
        // F(t) + F(-t) = 1.
        CHECK(analysis::coord_cdf(d, 0.8) + analysis::coord_cdf(d, -0.8) ==
              doctest::Approx(1.0).epsilon(1e-11));
        // Strictly increasing inside the support.
        CHECK(analysis::coord_cdf(d, 0.5) > analysis::coord_cdf(d, 0.2));
    }
    // d=2 is the arcsine law: F(sqrt(2)*u) = 1/2 + asin(u)/pi.
    for (double u : {-0.9, -0.3, 0.5, 0.77}) {
        CHECK(analysis::coord_cdf(2, std::sqrt(2.0) * u) ==
              doctest::Approx(0.5 + std::asin(u) / pi).epsilon(1e-10));
    }
    CHECK_THROWS_AS(analysis::coord_cdf(1, 0.0), InvalidDimension);
}

TEST_CASE("coordinate CDF approaches the normal CDF as d grows") {
    double sup = 0.0;
    for (double t = -4.0; t <= 4.0; t += 0.05) {
        sup = std::max(sup, std::fabs(analysis::coord_cdf(4096, t) -
                                      special::norm_cdf(t)));
    }
    CHECK(sup < 0.01);
    // And the gap shrinks with d.
    double gap64 = std::fabs(analysis::coord_cdf(64, 1.0) - special::norm_cdf(1.0));
    double gap1024 = std::fabs(analysis::coord_cdf(1024, 1.0) - special::norm_cdf(1.0));
    CHECK(gap1024 < gap64);
}

TEST_CASE("variance of the scaled coordinate is exactly one") {
    // Integration by parts avoids differentiating the CDF (the density is
    // singular at the support edge for d=2): by symmetry
    // E[T^2] = int_0^inf 2t P(|T| > t) dt = 4 int_0^sqrt(d) t (1 - F(t)) dt.
    for (int d : {2, 8, 64}) {
        double rd = std::sqrt(static_cast<double>(d));
        double var = 4.0 * special::adaptive_simpson(
                               [&](double t) {
                                   return t * (1.0 - analysis::coord_cdf(d, t));
                               },
                               0.0, rd, 1e-8);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("closed-form one-bit law and its limits") {
    CHECK(analysis::exact_vnmse_1bit_biased(1) == 0.0);
    CHECK(analysis::exact_vnmse_1bit_biased(128) ==
          doctest::Approx(0.360541).epsilon(1e-6));
    double limit = 1.0 - 2.0 / pi;
    CHECK(limit == doctest::Approx(0.36338).epsilon(1e-4));
    CHECK(analysis::exact_vnmse_1bit_biased(1 << 20) ==
          doctest::Approx(limit).epsilon(1e-5));
    // Increasing in d.
    for (int d = 1; d < 40; ++d) {
        CHECK(analysis::exact_vnmse_1bit_biased(d + 1) >
              analysis::exact_vnmse_1bit_biased(d));
    }
    CHECK_THROWS_AS(analysis::exact_vnmse_1bit_biased(0), InvalidDimension);
}

TEST_CASE("worst-case ladder bound") {
    CHECK(analysis::turboquant_mse_bound(1) == doctest::Approx(0.680).epsilon(1e-3));
    CHECK(analysis::turboquant_mse_bound(2) ==
          doctest::Approx(analysis::turboquant_mse_bound(1) / 4).epsilon(1e-12));
    CHECK(analysis::turboquant_mse_bound(4) ==
          doctest::Approx(0.01063).epsilon(1e-3));
    for (int b = 1; b < 8; ++b) {
        CHECK(analysis::turboquant_mse_bound(b + 1) <
              analysis::turboquant_mse_bound(b));
    }
    CHECK_THROWS_AS(analysis::turboquant_mse_bound(0), InvalidValue);
}

TEST_CASE("one-bit asymptotic limits and the unsupported cases") {
    CHECK(analysis::asymptotic_vnmse({MethodTag::EdenUnbiased, 1}) ==
          doctest::Approx(0.5708).epsilon(1e-3));
    CHECK(analysis::asymptotic_vnmse({MethodTag::Qjl, 1}) ==
          doctest::Approx(1.5708).epsilon(1e-2));
    double ratio = analysis::asymptotic_vnmse({MethodTag::Qjl, 1}) /
                   analysis::asymptotic_vnmse({MethodTag::EdenUnbiased, 1});
    CHECK(ratio == doctest::Approx(2.752).epsilon(1e-3));
    CHECK_THROWS_AS(analysis::asymptotic_vnmse({MethodTag::EdenBiased, 1}),
                    Unsupported);
    CHECK_THROWS_AS(analysis::asymptotic_vnmse({MethodTag::EdenUnbiased, 2}),
                    Unsupported);
    CHECK_THROWS_AS(analysis::asymptotic_vnmse({MethodTag::TurboQuantMse, 1}),
                    Unsupported);
}

TEST_CASE("semi-analytic curve reproduces the exact one-bit law") {
    for (int d : {2, 4, 16, 128, 1024}) {
        CHECK(analysis::expected_vnmse_biased(1, d) ==
              doctest::Approx(analysis::exact_vnmse_1bit_biased(d))
                  .epsilon(1e-4));
    }
}

TEST_CASE("semi-analytic curve limits and shape") {
    // Large d converges to the per-coordinate codebook distortion.
    for (int b : {2, 3}) {
        CHECK(analysis::expected_vnmse_biased(b, 4096) ==
              doctest::Approx(cached_codebook(b).expected_distortion)
                  .epsilon(1e-2));
    }
    CHECK(std::fabs(analysis::expected_vnmse_biased(2, 4096) -
                    cached_codebook(2).expected_distortion) < 1e-3);
    // Decreasing in b at fixed d; increasing in d at fixed b.
    for (int b = 1; b < 4; ++b) {
        CHECK(analysis::expected_vnmse_biased(b + 1, 64) <
              analysis::expected_vnmse_biased(b, 64));
    }
    CHECK(analysis::expected_vnmse_biased(2, 256) >
          analysis::expected_vnmse_biased(2, 16));
    CHECK_THROWS_AS(analysis::expected_vnmse_biased(0, 16), InvalidValue);
    CHECK_THROWS_AS(analysis::expected_vnmse_biased(2, 1), InvalidDimension);
}
