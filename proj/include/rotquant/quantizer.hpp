#pragma once

#include "rotquant/rotation.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace rotquant {

enum class MethodTag : uint8_t {
    EdenBiased = 0,
    EdenUnbiased = 1,
    TurboQuantMse = 2,
    TurboQuantProd = 3,
    Qjl = 4,
};

/// A quantization scheme plus its total bit budget. DRIVE is EdenBiased /
/// EdenUnbiased with bits = 1. TurboQuantProd spends bits-1 on its first
/// stage and 1 on the sign-quantized residual; bits = 1 degenerates to pure
/// Qjl. Qjl itself is always 1 bit.
struct MethodKind {
    MethodTag tag = MethodTag::EdenBiased;
    int bits = 1;

    void validate() const;
    std::string name() const; // canonical CLI name, e.g. "eden-biased"
};

/// Parses a canonical method name; throws InvalidConfig on unknown names.
MethodTag parse_method_tag(const std::string& name);

/// The wire/storage unit: bit-packed codeword indices plus the two scalars
/// needed to reconstruct. `total_scale` is the single factor s such that
/// x_hat = s * R^-1(c[idx]) (codebook methods) or s * G^T(sign) (Qjl).
/// For TurboQuantProd the indices hold the (bits-1)-bit first stage and
/// `stage2` holds the sign-quantized residual.
struct QuantizedVector {
    MethodKind method;
    RotationSpec rotation;
    double norm_x = 0.0;
    double total_scale = 0.0;
    std::vector<uint8_t> indices; // little-endian in-byte, coordinate-major
    std::shared_ptr<const QuantizedVector> stage2;

    /// Bits per packed coordinate index for this payload (bits-1 for
    /// TurboQuantProd stage 1, 1 for Qjl, bits otherwise).
    int index_bits() const;
    int logical_dim() const { return rotation.logical_dim; }
    int padded_dim() const { return rotation.padded_dim; }
};

/// Rotate, quantize coordinates per the method's codebook, and keep the
/// method's reconstruction scale. The rotation spec's seed is the only
/// randomness; stage-2 / Gaussian seeds derive from it via fixed streams.
QuantizedVector quantize(const std::vector<double>& x, MethodKind method,
                         const RotationSpec& rotation);

/// x_hat, truncated to the logical dimension.
std::vector<double> dequantize(const QuantizedVector& qv);

/// <y, dequantize(qv)> computed in the rotated domain (the query is rotated,
/// never quantized).
double estimate_inner(const QuantizedVector& qv, const std::vector<double>& y);

std::vector<uint8_t> serialize(const QuantizedVector& qv);
QuantizedVector deserialize(const std::vector<uint8_t>& bytes);

/// Parse one payload starting at `pos` in a concatenated stream; advances
/// `pos` past the bytes consumed. Throws MalformedPayload like deserialize.
QuantizedVector deserialize_prefix(const std::vector<uint8_t>& bytes, size_t& pos);

// Bit-packing helpers (b bits per value, 1 <= b <= 8, little-endian within
// bytes, coordinate-major).
std::vector<uint8_t> pack_indices(const std::vector<uint16_t>& values, int bits);
std::vector<uint16_t> unpack_indices(const std::vector<uint8_t>& bytes, int bits,
                                     int count);

namespace detail {
/// The rotated-domain codeword c[idx] of a codebook-method payload
/// (padded_dim entries). Used by batched scorers.
std::vector<double> rotated_codeword(const QuantizedVector& qv);
/// Stage-2 spec for a TurboQuantProd quantizer seeded with `seed`.
RotationSpec residual_stage_spec(int dim, uint64_t seed);
} // namespace detail

} // namespace rotquant
