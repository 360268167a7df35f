#include "rotquant/quantizer.hpp"

#include "rotquant/codebook.hpp"
#include "rotquant/errors.hpp"
#include "rotquant/rng.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace rotquant;

namespace {

std::vector<double> random_vec(int d, uint64_t seed) {
    rng::SplitMix g(seed);
    std::vector<double> x(static_cast<size_t>(d));
    for (auto& v : x) v = std::exp(g.next_normal()); // positive, lognormal-ish
    return x;
}

double norm2(const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double rel_vnmse(const std::vector<double>& x, const std::vector<double>& xh) {
    double num = 0, den = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - xh[i]) * (x[i] - xh[i]);
        den += x[i] * x[i];
    }
    return num / den;
}

const std::vector<MethodKind> kAllKinds = {
    {MethodTag::EdenBiased, 1},    {MethodTag::EdenBiased, 3},
    {MethodTag::EdenUnbiased, 1},  {MethodTag::EdenUnbiased, 4},
    {MethodTag::TurboQuantMse, 2}, {MethodTag::TurboQuantMse, 5},
    {MethodTag::TurboQuantProd, 1}, {MethodTag::TurboQuantProd, 2},
    {MethodTag::TurboQuantProd, 4}, {MethodTag::Qjl, 1},
};

RotationSpec spec_for_kind(MethodTag tag, int d, uint64_t seed, bool rht) {
    if (tag == MethodTag::Qjl) return RotationSpec::gaussian(d, seed);
    return rht ? RotationSpec::rht(d, seed, 2) : RotationSpec::haar(d, seed);
}

} // namespace

TEST_CASE("method kinds: names, parsing, validation") {
    CHECK(parse_method_tag("eden-biased") == MethodTag::EdenBiased);
    CHECK(parse_method_tag("eden-unbiased") == MethodTag::EdenUnbiased);
    CHECK(parse_method_tag("tq-mse") == MethodTag::TurboQuantMse);
    CHECK(parse_method_tag("tq-prod") == MethodTag::TurboQuantProd);
    CHECK(parse_method_tag("qjl") == MethodTag::Qjl);
    CHECK_THROWS_AS(parse_method_tag("nope"), InvalidConfig);
    for (const auto& mk : kAllKinds) {
        CHECK(parse_method_tag(mk.name()) == mk.tag);
        CHECK_NOTHROW(mk.validate());
    }
    CHECK_THROWS_AS((MethodKind{MethodTag::Qjl, 2}.validate()), InvalidConfig);
    CHECK_THROWS_AS((MethodKind{MethodTag::EdenBiased, 0}.validate()), InvalidConfig);
    CHECK_THROWS_AS((MethodKind{MethodTag::EdenBiased, 9}.validate()), InvalidConfig);
}

TEST_CASE("bit packing round-trips every width") {
    rng::SplitMix g(3);
    for (int bits = 0; bits <= 8; ++bits) {
        for (int count : {1, 7, 64, 129}) {
            std::vector<uint16_t> vals(static_cast<size_t>(count));
            for (auto& v : vals) {
                v = static_cast<uint16_t>(g.next_u64() & ((1u << bits) - 1));
            }
            auto packed = pack_indices(vals, bits);
            CHECK(packed.size() == (static_cast<size_t>(count) * bits + 7) / 8);
            CHECK(unpack_indices(packed, bits, count) == vals);
        }
    }
    CHECK_THROWS_AS(unpack_indices({0x00}, 3, 9), MalformedPayload);
    CHECK_THROWS_AS(pack_indices({1}, 9), InvalidValue);
}

TEST_CASE("input validation") {
    auto spec = RotationSpec::haar(8, 1);
    std::vector<double> x(8, 1.0);
    CHECK_THROWS_AS(quantize({1.0, 2.0}, {MethodTag::EdenBiased, 2}, spec),
                    InvalidDimension);
    auto bad = x;
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(quantize(bad, {MethodTag::EdenBiased, 2}, spec), InvalidValue);
    bad[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(quantize(bad, {MethodTag::TurboQuantMse, 2}, spec), InvalidValue);
    // Method/spec kind mismatches.
    CHECK_THROWS_AS(quantize(x, {MethodTag::Qjl, 1}, spec), InvalidConfig);
    auto gspec = RotationSpec::gaussian(8, 1);
    CHECK_THROWS_AS(quantize(x, {MethodTag::EdenBiased, 2}, gspec), InvalidConfig);
    CHECK_THROWS_AS(quantize(x, {MethodTag::TurboQuantProd, 2}, gspec), InvalidConfig);
}

TEST_CASE("zero vectors quantize to explicit zero payloads") {
    int d = 12;
    std::vector<double> zero(static_cast<size_t>(d), 0.0);
    for (const auto& mk : kAllKinds) {
        auto spec = spec_for_kind(mk.tag, d, 9, /*rht=*/false);
        auto qv = quantize(zero, mk, spec);
        CHECK(qv.norm_x == 0.0);
        CHECK(qv.total_scale == 0.0);
        for (uint8_t b : qv.indices) CHECK(b == 0);
        auto back = dequantize(qv);
        CHECK(back == zero);
        CHECK(estimate_inner(qv, random_vec(d, 5)) == 0.0);
        auto rt = deserialize(serialize(qv));
        CHECK(dequantize(rt) == zero);
    }
}

TEST_CASE("unit-scale method stores exactly norm/sqrt(D)") {
    for (bool rht : {false, true}) {
        int d = 24;
        auto x = random_vec(d, 17);
        auto spec = spec_for_kind(MethodTag::TurboQuantMse, d, 3, rht);
        auto qv = quantize(x, {MethodTag::TurboQuantMse, 3}, spec);
        CHECK(qv.total_scale ==
              doctest::Approx(norm2(x) / std::sqrt(static_cast<double>(spec.padded_dim)))
                  .epsilon(1e-14));
    }
}

TEST_CASE("least-squares scale beats unit scale on every draw") {
    for (uint64_t s = 0; s < 200; ++s) {
        int d = 32;
        auto x = random_vec(d, 100 + s);
        auto spec = RotationSpec::haar(d, s);
        for (int b : {1, 2, 4}) {
            auto opt = quantize(x, {MethodTag::EdenBiased, b}, spec);
            auto unit = quantize(x, {MethodTag::TurboQuantMse, b}, spec);
            // Same codeword; only the scale differs.
            CHECK(opt.indices == unit.indices);
            CHECK(rel_vnmse(x, dequantize(opt)) <=
                  rel_vnmse(x, dequantize(unit)) + 1e-12);
        }
    }
}

TEST_CASE("one-bit least-squares scale equals the mean-absolute form") {
    // With a symmetric one-bit codebook the least-squares scalar collapses
    // to mean|R(x)| / E|N(0,1)|, i.e. x_hat = (||R(x)||_1 / D) * signs.
    int d = 16;
    double c0 = std::sqrt(2.0 / std::numbers::pi);
    for (uint64_t s = 0; s < 50; ++s) {
        auto x = random_vec(d, 300 + s);
        auto spec = RotationSpec::haar(d, s);
        auto qv = quantize(x, {MethodTag::EdenBiased, 1}, spec);
        auto y = rotate(x, spec, Direction::Forward);
        double l1 = 0;
        for (double v : y) l1 += std::fabs(v);
        CHECK(qv.total_scale * c0 ==
              doctest::Approx(l1 / d).epsilon(1e-12));
    }
}

TEST_CASE("unbiased scale averages to the identity") {
    int d = 64, n = 20000;
    auto x = random_vec(d, 4);
    std::vector<double> acc(static_cast<size_t>(d), 0.0);
    oracles::MeanVar vn;
    for (uint64_t s = 0; s < static_cast<uint64_t>(n); ++s) {
        auto spec = RotationSpec::rht(d, s, 2);
        auto qv = quantize(x, {MethodTag::EdenUnbiased, 2}, spec);
        auto xh = dequantize(qv);
        for (int j = 0; j < d; ++j) acc[static_cast<size_t>(j)] += xh[static_cast<size_t>(j)];
        vn.add(rel_vnmse(x, xh));
    }
    double err = 0;
    for (int j = 0; j < d; ++j) {
        double m = acc[static_cast<size_t>(j)] / n - x[static_cast<size_t>(j)];
        err += m * m;
    }
    CHECK(std::sqrt(err) / norm2(x) < 0.01);
    // Soft consistency: b-bit unbiased error is close to D/(1-D) of the
    // per-coordinate codebook distortion in moderate dimension.
    double dd = cached_codebook(2).expected_distortion;
    CHECK(vn.mean == doctest::Approx(dd / (1 - dd)).epsilon(0.15));
}

TEST_CASE("sign sketch stores the fixed scale and true signs") {
    int d = 40;
    auto x = random_vec(d, 8);
    auto spec = RotationSpec::gaussian(d, 21);
    auto qv = quantize(x, {MethodTag::Qjl, 1}, spec);
    CHECK(qv.total_scale ==
          doctest::Approx(std::sqrt(std::numbers::pi / 2.0) * norm2(x) / d)
              .epsilon(1e-14));
    auto g = gaussian_apply(x, 21, Direction::Forward);
    auto bits = unpack_indices(qv.indices, 1, d);
    for (int j = 0; j < d; ++j) {
        CHECK(bits[static_cast<size_t>(j)] == (g[static_cast<size_t>(j)] > 0 ? 1 : 0));
    }
}

TEST_CASE("sign sketch estimates are unbiased in the mean") {
    int d = 256, n = 500;
    auto x = random_vec(d, 12);
    oracles::MeanVar vn;
    for (uint64_t s = 0; s < static_cast<uint64_t>(n); ++s) {
        auto spec = RotationSpec::gaussian(d, s);
        auto qv = quantize(x, {MethodTag::Qjl, 1}, spec);
        vn.add(rel_vnmse(x, dequantize(qv)));
    }
    // Finite-d mean vNMSE of the sign sketch: pi/2 within a few percent.
    CHECK(vn.mean == doctest::Approx(std::numbers::pi / 2).epsilon(0.05));
}

TEST_CASE("two-stage construction: layout and residual stage") {
    int d = 48;
    auto x = random_vec(d, 31);
    auto spec = RotationSpec::haar(d, 77);
    auto qv = quantize(x, {MethodTag::TurboQuantProd, 3}, spec);
    CHECK(qv.index_bits() == 2);
    CHECK(qv.indices.size() == (static_cast<size_t>(d) * 2 + 7) / 8);
    REQUIRE(qv.stage2 != nullptr);
    CHECK(qv.stage2->method.tag == MethodTag::Qjl);
    CHECK(qv.stage2->logical_dim() == d);

    // The stage-2 payload is exactly a sign sketch of the stage-1 residual
    // under the derived spec.
    auto stage1 = qv;
    stage1.method = {MethodTag::TurboQuantMse, 2};
    stage1.stage2.reset();
    auto part1 = dequantize(stage1);
    std::vector<double> residual(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) residual[static_cast<size_t>(j)] = x[static_cast<size_t>(j)] - part1[static_cast<size_t>(j)];
    auto rspec = detail::residual_stage_spec(d, 77);
    auto pure = quantize(residual, {MethodTag::Qjl, 1}, rspec);
    CHECK(serialize(*qv.stage2) == serialize(pure));

    // Reconstruction is the sum of the stage reconstructions.
    auto full = dequantize(qv);
    auto s2part = dequantize(*qv.stage2);
    for (int j = 0; j < d; ++j) {
        CHECK(full[static_cast<size_t>(j)] ==
              doctest::Approx(part1[static_cast<size_t>(j)] + s2part[static_cast<size_t>(j)]).epsilon(1e-12));
    }
}

TEST_CASE("one-bit two-stage degenerates to the pure sign sketch") {
    int d = 20;
    auto x = random_vec(d, 3);
    auto spec = RotationSpec::haar(d, 5);
    auto qv = quantize(x, {MethodTag::TurboQuantProd, 1}, spec);
    CHECK(qv.total_scale == 0.0);
    CHECK(qv.index_bits() == 0);
    CHECK(qv.indices.empty());
    REQUIRE(qv.stage2 != nullptr);
    auto pure = quantize(x, {MethodTag::Qjl, 1}, detail::residual_stage_spec(d, 5));
    CHECK(serialize(*qv.stage2) == serialize(pure));
    CHECK(dequantize(qv) == dequantize(pure));
}

TEST_CASE("inner-product estimates match reconstruct-then-dot") {
    rng::SplitMix g(71);
    for (const auto& mk : kAllKinds) {
        for (int d : {8, 33, 128}) {
            for (int rep = 0; rep < 5; ++rep) {
                uint64_t s = g.next_u64();
                bool rht = (d == 33) && mk.tag != MethodTag::Qjl;
                auto spec = spec_for_kind(mk.tag, d, s, rht);
                auto x = random_vec(d, s ^ 1);
                auto y = random_vec(d, s ^ 2);
                auto qv = quantize(x, mk, spec);
                auto xh = dequantize(qv);
                double direct = 0;
                for (int j = 0; j < d; ++j) direct += y[static_cast<size_t>(j)] * xh[static_cast<size_t>(j)];
                double est = estimate_inner(qv, y);
                CHECK(est == doctest::Approx(direct).epsilon(1e-8));
            }
        }
    }
    auto spec = RotationSpec::haar(8, 1);
    auto qv = quantize(random_vec(8, 1), {MethodTag::EdenBiased, 2}, spec);
    CHECK_THROWS_AS(estimate_inner(qv, random_vec(9, 2)), InvalidDimension);
}

TEST_CASE("serialization round-trips exactly") {
    rng::SplitMix g(2025);
    for (const auto& mk : kAllKinds) {
        for (int d : {5, 64}) {
            uint64_t s = g.next_u64();
            auto spec = spec_for_kind(mk.tag, d, s, d == 5 && mk.tag != MethodTag::Qjl);
            auto x = random_vec(d, s);
            auto qv = quantize(x, mk, spec);
            auto bytes = serialize(qv);
            auto rt = deserialize(bytes);
            CHECK(serialize(rt) == bytes);
            CHECK(rt.method.tag == mk.tag);
            CHECK(rt.method.bits == mk.bits);
            CHECK(rt.norm_x == qv.norm_x);
            CHECK(rt.total_scale == qv.total_scale);
            CHECK(rt.indices == qv.indices);
            CHECK(dequantize(rt) == dequantize(qv));
        }
    }
}

TEST_CASE("malformed payloads are rejected") {
    auto spec = RotationSpec::haar(16, 9);
    auto qv = quantize(random_vec(16, 9), {MethodTag::EdenBiased, 2}, spec);
    auto good = serialize(qv);

    // Truncation anywhere must throw, never crash.
    for (size_t cut = 0; cut < good.size(); ++cut) {
        std::vector<uint8_t> part(good.begin(), good.begin() + static_cast<long>(cut));
        CHECK_THROWS_AS((void)deserialize(part), MalformedPayload);
    }
    auto flip = [&](size_t pos, uint8_t val) {
        auto bad = good;
        bad[pos] = val;
        return bad;
    };
    CHECK_THROWS_AS((void)deserialize(flip(0, 'X')), MalformedPayload); // magic
    CHECK_THROWS_AS((void)deserialize(flip(3, '2')), MalformedPayload); // version
    CHECK_THROWS_AS((void)deserialize(flip(4, 250)), MalformedPayload); // method tag
    CHECK_THROWS_AS((void)deserialize(flip(5, 9)), MalformedPayload);   // bits range
    CHECK_THROWS_AS((void)deserialize(flip(6, 7)), MalformedPayload);   // rotation kind
    CHECK_THROWS_AS((void)deserialize(flip(40, 1)), MalformedPayload);  // stage-2 flag

    // Zero claimed dimension.
    auto bad_dim = good;
    for (int k = 0; k < 4; ++k) bad_dim[16 + static_cast<size_t>(k)] = 0;
    CHECK_THROWS_AS((void)deserialize(bad_dim), MalformedPayload);

    // Non-finite stored scale.
    auto bad_scale = good;
    for (int k = 0; k < 8; ++k) bad_scale[32 + static_cast<size_t>(k)] = 0xFF;
    CHECK_THROWS_AS((void)deserialize(bad_scale), MalformedPayload);

    // Trailing garbage.
    auto extra = good;
    extra.push_back(0);
    CHECK_THROWS_AS((void)deserialize(extra), MalformedPayload);

    CHECK_THROWS_AS((void)deserialize({}), MalformedPayload);
}

TEST_CASE("prefix parsing walks concatenated payloads") {
    auto spec = RotationSpec::haar(6, 1);
    auto a = serialize(quantize(random_vec(6, 1), {MethodTag::EdenBiased, 2}, spec));
    auto b = serialize(quantize(random_vec(6, 2), {MethodTag::TurboQuantProd, 2}, spec));
    std::vector<uint8_t> blob(a);
    blob.insert(blob.end(), b.begin(), b.end());
    size_t pos = 0;
    auto qa = deserialize_prefix(blob, pos);
    CHECK(pos == a.size());
    CHECK(serialize(qa) == a);
    auto qb = deserialize_prefix(blob, pos);
    CHECK(pos == blob.size());
    CHECK(serialize(qb) == b);
}
