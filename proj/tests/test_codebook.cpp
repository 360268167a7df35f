#include "rotquant/codebook.hpp"

#include "rotquant/errors.hpp"
#include "rotquant/special.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace rotquant;

TEST_CASE("one- and two-bit codebooks match the known optimal tables") {
    auto cb1 = lloyd_max_normal(1);
    REQUIRE(cb1.centroids.size() == 2);
    // 1-bit optimum is the conditional mean of a half-normal: sqrt(2/pi).
    double half_normal_mean = std::sqrt(2.0 / std::numbers::pi);
    CHECK(cb1.centroids[1] == doctest::Approx(half_normal_mean).epsilon(1e-12));
    CHECK(cb1.centroids[1] == doctest::Approx(0.79788).epsilon(1e-4));
    CHECK(cb1.centroids[0] == doctest::Approx(-cb1.centroids[1]).epsilon(1e-12));
    CHECK(cb1.boundaries.size() == 1);
    CHECK(cb1.boundaries[0] == doctest::Approx(0.0));
    CHECK(cb1.expected_distortion ==
          doctest::Approx(1.0 - 2.0 / std::numbers::pi).epsilon(1e-10));

    auto cb2 = lloyd_max_normal(2);
    REQUIRE(cb2.centroids.size() == 4);
    CHECK(cb2.centroids[2] == doctest::Approx(0.45278).epsilon(1e-4));
    CHECK(cb2.centroids[3] == doctest::Approx(1.51042).epsilon(1e-4));
}

TEST_CASE("codebooks agree with an independent dense-grid optimizer") {
    for (int b = 1; b <= 6; ++b) {
        auto lib = lloyd_max_normal(b);
        auto ref = oracles::grid_lloyd(b);
        REQUIRE(lib.centroids.size() == ref.centroids.size());
        for (size_t i = 0; i < lib.centroids.size(); ++i) {
            CHECK(lib.centroids[i] ==
                  doctest::Approx(ref.centroids[i]).epsilon(1e-6));
        }
        CHECK(lib.expected_distortion ==
              doctest::Approx(ref.distortion).epsilon(1e-6));
    }
}

TEST_CASE("structure invariants hold at every width") {
    for (int b = 1; b <= 8; ++b) {
        auto cb = cached_codebook(b);
        int k = 1 << b;
        REQUIRE(static_cast<int>(cb.centroids.size()) == k);
        REQUIRE(static_cast<int>(cb.boundaries.size()) == k - 1);
        for (int i = 0; i + 1 < k; ++i) {
            CHECK(cb.centroids[static_cast<size_t>(i)] < cb.centroids[static_cast<size_t>(i) + 1]);
            CHECK(cb.boundaries[static_cast<size_t>(i)] ==
                  doctest::Approx(0.5 * (cb.centroids[static_cast<size_t>(i)] +
                                         cb.centroids[static_cast<size_t>(i) + 1]))
                      .epsilon(1e-12));
        }
        // Symmetry about zero.
        for (int i = 0; i < k / 2; ++i) {
            CHECK(cb.centroids[static_cast<size_t>(i)] ==
                  doctest::Approx(-cb.centroids[static_cast<size_t>(k - 1 - i)]).epsilon(1e-10));
        }
        // Centroid = conditional mean of its own cell (Lloyd fixed point):
        // via the identity E[c(Z)^2] = E[Z c(Z)] it implies
        // distortion = 1 - E[c(Z)^2].
        double p = 0.0, a = 0.0;
        for (int i = 0; i < k; ++i) {
            double lo = i == 0 ? -std::numeric_limits<double>::infinity()
                               : cb.boundaries[static_cast<size_t>(i) - 1];
            double hi = i == k - 1 ? std::numeric_limits<double>::infinity()
                                   : cb.boundaries[static_cast<size_t>(i)];
            double mass = special::norm_cdf(hi) - special::norm_cdf(lo);
            double moment = special::norm_pdf(lo) - special::norm_pdf(hi);
            p += cb.centroids[static_cast<size_t>(i)] * cb.centroids[static_cast<size_t>(i)] * mass;
            a += cb.centroids[static_cast<size_t>(i)] * moment;
        }
        CHECK(a == doctest::Approx(p).epsilon(1e-9));
        CHECK(cb.expected_distortion == doctest::Approx(1.0 - p).epsilon(1e-9));
    }
    // Distortion decreases strictly with width.
    for (int b = 1; b < 8; ++b) {
        CHECK(cached_codebook(b + 1).expected_distortion <
              cached_codebook(b).expected_distortion);
    }
}

TEST_CASE("degenerate zero-bit codebook") {
    auto cb = Codebook::degenerate_zero();
    CHECK(cb.bits == 0);
    REQUIRE(cb.centroids.size() == 1);
    CHECK(cb.centroids[0] == 0.0);
    CHECK(cb.expected_distortion == doctest::Approx(1.0));
    CHECK(nearest_index(3.7, cb) == 0);
    CHECK(nearest_index(-0.2, cb) == 0);
}

TEST_CASE("nearest_index brackets boundaries correctly") {
    auto cb = cached_codebook(2);
    for (double z : {-5.0, -0.7, -0.1, 0.3, 2.0, 9.0}) {
        int i = nearest_index(z, cb);
        double best = std::numeric_limits<double>::infinity();
        int want = 0;
        for (int j = 0; j < 4; ++j) {
            double dist = std::fabs(z - cb.centroids[static_cast<size_t>(j)]);
            if (dist < best) {
                best = dist;
                want = j;
            }
        }
        CHECK(i == want);
    }
    // Exact boundary hits resolve to the lower cell.
    CHECK(nearest_index(cb.boundaries[1], cb) == 1);
    CHECK(nearest_index(cb.boundaries[2], cb) == 2);
    CHECK_THROWS_AS(nearest_index(std::nan(""), cb), InvalidValue);
}

TEST_CASE("width bounds are enforced") {
    CHECK_THROWS_AS(lloyd_max_normal(0), InvalidValue);
    CHECK_THROWS_AS(lloyd_max_normal(9), InvalidValue);
    CHECK_THROWS_AS(cached_codebook(-1), InvalidValue);
    CHECK_NOTHROW(cached_codebook(0)); // degenerate width is cacheable
}
