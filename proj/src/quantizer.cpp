#include "rotquant/quantizer.hpp"

#include "rotquant/codebook.hpp"
#include "rotquant/errors.hpp"
#include "rotquant/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

namespace rotquant {

namespace {

constexpr char kMagic[4] = {'R', 'Q', 'V', '1'};
constexpr size_t kHeaderBytes = 4 + 1 + 1 + 1 + 1 + 8 + 4 + 4 + 8 + 8 + 1;

bool is_codebook_method(MethodTag t) {
    return t == MethodTag::EdenBiased || t == MethodTag::EdenUnbiased ||
           t == MethodTag::TurboQuantMse;
}

double l2_norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void check_finite(const std::vector<double>& x, const char* who) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw InvalidValue(std::string(who) + ": NaN/Inf coordinate");
        }
    }
}

size_t packed_bytes(int padded_dim, int bits) {
    return (static_cast<size_t>(padded_dim) * static_cast<size_t>(bits) + 7) / 8;
}

} // namespace

void MethodKind::validate() const {
    if (bits < 1 || bits > 8) {
        throw InvalidConfig("MethodKind: bits must be in 1..8");
    }
    if (tag == MethodTag::Qjl && bits != 1) {
        throw InvalidConfig("MethodKind: qjl is one bit per coordinate");
    }
}

std::string MethodKind::name() const {
    switch (tag) {
    case MethodTag::EdenBiased: return "eden-biased";
    case MethodTag::EdenUnbiased: return "eden-unbiased";
    case MethodTag::TurboQuantMse: return "tq-mse";
    case MethodTag::TurboQuantProd: return "tq-prod";
    case MethodTag::Qjl: return "qjl";
    }
    return "?";
}

MethodTag parse_method_tag(const std::string& name) {
    if (name == "eden-biased") return MethodTag::EdenBiased;
    if (name == "eden-unbiased") return MethodTag::EdenUnbiased;
    if (name == "tq-mse") return MethodTag::TurboQuantMse;
    if (name == "tq-prod") return MethodTag::TurboQuantProd;
    if (name == "qjl") return MethodTag::Qjl;
    throw InvalidConfig("unknown method name: " + name);
}

int QuantizedVector::index_bits() const {
    switch (method.tag) {
    case MethodTag::TurboQuantProd: return method.bits - 1;
    case MethodTag::Qjl: return 1;
    default: return method.bits;
    }
}

// ---------------------------------------------------------------------------
// Bit packing

std::vector<uint8_t> pack_indices(const std::vector<uint16_t>& values, int bits) {
    if (bits < 0 || bits > 8) throw InvalidValue("pack_indices: bits must be in 0..8");
    if (bits == 0) return {};
    std::vector<uint8_t> out(
        (values.size() * static_cast<size_t>(bits) + 7) / 8, 0);
    size_t pos = 0;
    for (uint16_t v : values) {
        for (int k = 0; k < bits; ++k, ++pos) {
            if (v & (1u << k)) out[pos >> 3] |= static_cast<uint8_t>(1u << (pos & 7));
        }
    }
    return out;
}

std::vector<uint16_t> unpack_indices(const std::vector<uint8_t>& bytes, int bits,
                                     int count) {
    if (bits < 0 || bits > 8) throw InvalidValue("unpack_indices: bits must be in 0..8");
    std::vector<uint16_t> out(static_cast<size_t>(count), 0);
    if (bits == 0) return out;
    if (bytes.size() != packed_bytes(count, bits)) {
        throw MalformedPayload("unpack_indices: bit-pack length mismatch");
    }
    size_t pos = 0;
    for (auto& v : out) {
        for (int k = 0; k < bits; ++k, ++pos) {
            if (bytes[pos >> 3] & (1u << (pos & 7))) v |= static_cast<uint16_t>(1u << k);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quantize

namespace detail {

RotationSpec residual_stage_spec(int dim, uint64_t seed) {
    return RotationSpec::gaussian(dim, rng::mix64(seed, rng::kResidualStage));
}

std::vector<double> rotated_codeword(const QuantizedVector& qv) {
    int b = qv.index_bits();
    const Codebook& cb = cached_codebook(b);
    auto idx = unpack_indices(qv.indices, b, qv.padded_dim());
    std::vector<double> c(static_cast<size_t>(qv.padded_dim()));
    for (size_t j = 0; j < c.size(); ++j) {
        uint16_t i = idx[j];
        if (i >= cb.centroids.size()) {
            throw MalformedPayload("rotated_codeword: index out of codebook range");
        }
        c[j] = cb.centroids[i];
    }
    return c;
}

} // namespace detail

namespace {

QuantizedVector quantize_codebook(const std::vector<double>& x, MethodKind method,
                                  const RotationSpec& rotation, double norm) {
    int padded = rotation.padded_dim;
    QuantizedVector qv;
    qv.method = method;
    qv.rotation = rotation;
    qv.norm_x = norm;

    if (norm == 0.0) {
        qv.total_scale = 0.0;
        qv.indices.assign(packed_bytes(padded, method.bits), 0);
        return qv;
    }

    std::vector<double> xp(x);
    xp.resize(static_cast<size_t>(padded), 0.0);
    std::vector<double> y = rotate(xp, rotation, Direction::Forward);

    double sqrt_d = std::sqrt(static_cast<double>(padded));
    double eta = sqrt_d / norm;
    const Codebook& cb = cached_codebook(method.bits);

    std::vector<uint16_t> idx(static_cast<size_t>(padded));
    double zc = 0.0; // <z, c>
    double cc = 0.0; // ||c||^2
    for (int j = 0; j < padded; ++j) {
        double z = eta * y[static_cast<size_t>(j)];
        int i = nearest_index(z, cb);
        idx[static_cast<size_t>(j)] = static_cast<uint16_t>(i);
        double c = cb.centroids[static_cast<size_t>(i)];
        zc += z * c;
        cc += c * c;
    }
    qv.indices = pack_indices(idx, method.bits);

    switch (method.tag) {
    case MethodTag::TurboQuantMse:
        qv.total_scale = norm / sqrt_d;
        break;
    case MethodTag::EdenBiased:
        // Least-squares optimal scalar; clamp a nonpositive correlation to 0.
        qv.total_scale = (zc > 0.0) ? (zc / cc) * (norm / sqrt_d) : 0.0;
        break;
    case MethodTag::EdenUnbiased:
        if (zc <= 0.0) {
            throw DegenerateScale(
                "quantize: nonpositive codeword correlation, unbiased scale undefined");
        }
        qv.total_scale = sqrt_d * norm / zc;
        break;
    default:
        throw InvalidConfig("quantize_codebook: not a codebook method");
    }
    return qv;
}

QuantizedVector quantize_qjl(const std::vector<double>& x,
                             const RotationSpec& rotation, double norm) {
    int d = rotation.logical_dim;
    QuantizedVector qv;
    qv.method = {MethodTag::Qjl, 1};
    qv.rotation = rotation;
    qv.norm_x = norm;
    if (norm == 0.0) {
        qv.total_scale = 0.0;
        qv.indices.assign(packed_bytes(d, 1), 0);
        return qv;
    }
    std::vector<double> g = gaussian_apply(x, rotation.seed, Direction::Forward);
    std::vector<uint16_t> bits_v(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
        bits_v[static_cast<size_t>(j)] = g[static_cast<size_t>(j)] > 0.0 ? 1 : 0;
    }
    qv.indices = pack_indices(bits_v, 1);
    qv.total_scale = std::sqrt(std::numbers::pi / 2.0) * norm / static_cast<double>(d);
    return qv;
}

std::vector<double> qjl_sign_vector(const QuantizedVector& qv) {
    auto bits_v = unpack_indices(qv.indices, 1, qv.padded_dim());
    std::vector<double> s(static_cast<size_t>(qv.padded_dim()));
    for (size_t j = 0; j < s.size(); ++j) s[j] = bits_v[j] ? 1.0 : -1.0;
    return s;
}

} // namespace

QuantizedVector quantize(const std::vector<double>& x, MethodKind method,
                         const RotationSpec& rotation) {
    method.validate();
    rotation.validate();
    int d = static_cast<int>(x.size());
    if (d < 1) throw InvalidDimension("quantize: empty input");
    if (d != rotation.logical_dim) {
        throw InvalidDimension("quantize: input length does not match rotation spec");
    }
    check_finite(x, "quantize");
    double norm = l2_norm(x);

    if (method.tag == MethodTag::Qjl) {
        if (rotation.kind != RotationKind::GaussianJl) {
            throw InvalidConfig("quantize: qjl requires a GaussianJl spec");
        }
        return quantize_qjl(x, rotation, norm);
    }
    if (rotation.kind == RotationKind::GaussianJl) {
        throw InvalidConfig("quantize: codebook methods need an orthogonal rotation");
    }

    if (is_codebook_method(method.tag)) {
        return quantize_codebook(x, method, rotation, norm);
    }

    // TurboQuantProd: (bits-1)-bit S=1 stage, then sign-quantize the residual.
    QuantizedVector qv;
    qv.method = method;
    qv.rotation = rotation;
    qv.norm_x = norm;
    std::vector<double> residual;
    if (method.bits > 1) {
        QuantizedVector stage1 = quantize_codebook(
            x, {MethodTag::TurboQuantMse, method.bits - 1}, rotation, norm);
        residual = dequantize(stage1);
        for (int j = 0; j < d; ++j) {
            residual[static_cast<size_t>(j)] = x[static_cast<size_t>(j)] - residual[static_cast<size_t>(j)];
        }
        qv.total_scale = stage1.total_scale;
        qv.indices = std::move(stage1.indices);
    } else {
        residual = x;
        qv.total_scale = 0.0;
        qv.indices.clear();
    }
    RotationSpec stage2_spec = detail::residual_stage_spec(d, rotation.seed);
    qv.stage2 = std::make_shared<QuantizedVector>(
        quantize_qjl(residual, stage2_spec, l2_norm(residual)));
    return qv;
}

std::vector<double> dequantize(const QuantizedVector& qv) {
    int d = qv.logical_dim();
    int padded = qv.padded_dim();
    if (qv.indices.size() != packed_bytes(padded, qv.index_bits())) {
        throw MalformedPayload("dequantize: corrupt bit-pack length");
    }

    std::vector<double> out;
    if (qv.method.tag == MethodTag::Qjl) {
        if (qv.total_scale == 0.0) {
            out.assign(static_cast<size_t>(d), 0.0);
        } else {
            out = gaussian_apply(qjl_sign_vector(qv), qv.rotation.seed,
                                 Direction::Inverse);
            for (auto& v : out) v *= qv.total_scale;
        }
        return out;
    }

    if (qv.total_scale == 0.0 || qv.index_bits() == 0) {
        out.assign(static_cast<size_t>(d), 0.0);
    } else {
        std::vector<double> c = detail::rotated_codeword(qv);
        std::vector<double> back = rotate(c, qv.rotation, Direction::Inverse);
        out.assign(back.begin(), back.begin() + d);
        for (auto& v : out) v *= qv.total_scale;
    }
    if (qv.method.tag == MethodTag::TurboQuantProd) {
        if (!qv.stage2) throw MalformedPayload("dequantize: missing stage-2 payload");
        std::vector<double> r = dequantize(*qv.stage2);
        for (int j = 0; j < d; ++j) out[static_cast<size_t>(j)] += r[static_cast<size_t>(j)];
    }
    return out;
}

double estimate_inner(const QuantizedVector& qv, const std::vector<double>& y) {
    int d = qv.logical_dim();
    if (static_cast<int>(y.size()) != d) {
        throw InvalidDimension("estimate_inner: query length mismatch");
    }
    if (qv.indices.size() != packed_bytes(qv.padded_dim(), qv.index_bits())) {
        throw MalformedPayload("estimate_inner: corrupt bit-pack length");
    }

    double est = 0.0;
    if (qv.method.tag == MethodTag::Qjl) {
        if (qv.total_scale != 0.0) {
            std::vector<double> gy = gaussian_apply(y, qv.rotation.seed,
                                                    Direction::Forward);
            std::vector<double> s = qjl_sign_vector(qv);
            double dot = 0.0;
            for (int j = 0; j < d; ++j) dot += gy[static_cast<size_t>(j)] * s[static_cast<size_t>(j)];
            est = qv.total_scale * dot;
        }
        return est;
    }

    if (qv.total_scale != 0.0 && qv.index_bits() > 0) {
        std::vector<double> yp(y);
        yp.resize(static_cast<size_t>(qv.padded_dim()), 0.0);
        std::vector<double> ry = rotate(yp, qv.rotation, Direction::Forward);
        std::vector<double> c = detail::rotated_codeword(qv);
        double dot = 0.0;
        for (size_t j = 0; j < ry.size(); ++j) dot += ry[j] * c[j];
        est = qv.total_scale * dot;
    }
    if (qv.method.tag == MethodTag::TurboQuantProd) {
        if (!qv.stage2) throw MalformedPayload("estimate_inner: missing stage-2 payload");
        est += estimate_inner(*qv.stage2, y);
    }
    return est;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<uint8_t>(v >> (8 * k)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<uint8_t>(v >> (8 * k)));
}

void put_f64(std::vector<uint8_t>& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

void serialize_into(const QuantizedVector& qv, std::vector<uint8_t>& out) {
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(static_cast<uint8_t>(qv.method.tag));
    out.push_back(static_cast<uint8_t>(qv.method.bits));
    out.push_back(static_cast<uint8_t>(qv.rotation.kind));
    out.push_back(static_cast<uint8_t>(qv.rotation.rounds));
    put_u64(out, qv.rotation.seed);
    put_u32(out, static_cast<uint32_t>(qv.rotation.logical_dim));
    put_u32(out, static_cast<uint32_t>(qv.rotation.padded_dim));
    put_f64(out, qv.norm_x);
    put_f64(out, qv.total_scale);
    out.push_back(qv.stage2 ? 1 : 0);
    out.insert(out.end(), qv.indices.begin(), qv.indices.end());
    if (qv.stage2) serialize_into(*qv.stage2, out);
}

struct Cursor {
    const uint8_t* data;
    size_t size;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > size) throw MalformedPayload("payload truncated");
    }
    uint8_t u8() {
        need(1);
        return data[pos++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<uint32_t>(data[pos + k]) << (8 * k);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<uint64_t>(data[pos + k]) << (8 * k);
        pos += 8;
        return v;
    }
    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

QuantizedVector parse_payload(Cursor& cur) {
    cur.need(kHeaderBytes);
    if (std::memcmp(cur.data + cur.pos, kMagic, 4) != 0) {
        throw MalformedPayload("bad magic/version");
    }
    cur.pos += 4;

    QuantizedVector qv;
    uint8_t tag = cur.u8();
    if (tag > static_cast<uint8_t>(MethodTag::Qjl)) {
        throw MalformedPayload("unknown method tag");
    }
    qv.method.tag = static_cast<MethodTag>(tag);
    qv.method.bits = cur.u8();
    uint8_t rkind = cur.u8();
    if (rkind > static_cast<uint8_t>(RotationKind::GaussianJl)) {
        throw MalformedPayload("unknown rotation kind");
    }
    qv.rotation.kind = static_cast<RotationKind>(rkind);
    qv.rotation.rounds = cur.u8();
    qv.rotation.seed = cur.u64();
    qv.rotation.logical_dim = static_cast<int>(cur.u32());
    qv.rotation.padded_dim = static_cast<int>(cur.u32());
    qv.norm_x = cur.f64();
    qv.total_scale = cur.f64();
    uint8_t flag = cur.u8();
    if (flag > 1) throw MalformedPayload("bad stage-2 flag");

    if (qv.rotation.logical_dim < 1) {
        throw MalformedPayload("zero coordinates claimed");
    }
    try {
        qv.method.validate();
        qv.rotation.validate();
    } catch (const Error& e) {
        throw MalformedPayload(std::string("inconsistent header: ") + e.what());
    }
    if (!std::isfinite(qv.norm_x) || !std::isfinite(qv.total_scale)) {
        throw MalformedPayload("non-finite scalar field");
    }
    bool want_stage2 = qv.method.tag == MethodTag::TurboQuantProd;
    if (static_cast<bool>(flag) != want_stage2) {
        throw MalformedPayload("stage-2 flag does not match method");
    }

    size_t nbytes = packed_bytes(qv.rotation.padded_dim, qv.index_bits());
    cur.need(nbytes);
    qv.indices.assign(cur.data + cur.pos, cur.data + cur.pos + nbytes);
    cur.pos += nbytes;

    if (want_stage2) {
        QuantizedVector s2 = parse_payload(cur);
        if (s2.method.tag != MethodTag::Qjl ||
            s2.logical_dim() != qv.logical_dim()) {
            throw MalformedPayload("stage-2 payload inconsistent with stage 1");
        }
        qv.stage2 = std::make_shared<QuantizedVector>(std::move(s2));
    }
    return qv;
}

} // namespace

std::vector<uint8_t> serialize(const QuantizedVector& qv) {
    std::vector<uint8_t> out;
    serialize_into(qv, out);
    return out;
}

QuantizedVector deserialize(const std::vector<uint8_t>& bytes) {
    Cursor cur{bytes.data(), bytes.size()};
    QuantizedVector qv = parse_payload(cur);
    if (cur.pos != bytes.size()) {
        throw MalformedPayload("trailing bytes after payload");
    }
    return qv;
}

QuantizedVector deserialize_prefix(const std::vector<uint8_t>& bytes, size_t& pos) {
    if (pos > bytes.size()) throw MalformedPayload("read position past end");
    Cursor cur{bytes.data(), bytes.size(), pos};
    QuantizedVector qv = parse_payload(cur);
    pos = cur.pos;
    return qv;
}

} // namespace rotquant
