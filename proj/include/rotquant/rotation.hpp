#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace rotquant {

enum class RotationKind : uint8_t {
    HaarExact = 0, // explicit Haar-uniform orthogonal matrix (small d)
    Rht = 1,       // randomized Hadamard transform, 1 or 2 rounds
    GaussianJl = 2 // iid N(0,1) projection, not orthogonal
};

enum class Direction { Forward, Inverse };

/// Which seeded transform to apply, plus the padding bookkeeping.
/// padded_dim is the next power of two >= logical_dim for Rht and equals
/// logical_dim otherwise.
struct RotationSpec {
    RotationKind kind = RotationKind::HaarExact;
    int rounds = 1; // Rht only, 1 or 2
    uint64_t seed = 0;
    int logical_dim = 0;
    int padded_dim = 0;

    static RotationSpec haar(int dim, uint64_t seed);
    static RotationSpec rht(int dim, uint64_t seed, int rounds = 1);
    static RotationSpec gaussian(int dim, uint64_t seed);

    /// Throws InvalidDimension / InvalidValue on a malformed spec.
    void validate() const;
};

int next_pow2(int n);

/// Zero-pads x to the next power of two; returns the padded vector and the
/// original length. Already-power-of-two input is returned unchanged.
std::pair<std::vector<double>, int> pad_pow2(const std::vector<double>& x);

/// In-place orthonormal Walsh-Hadamard transform (butterfly then 1/sqrt(n)).
/// Length must be a power of two. Self-adjoint and involutive.
void wht_orthonormal(std::span<double> x);

/// The +-1 diagonal for RHT round r (0-based), one sign per coordinate from
/// the stream seeded with mix64(seed, kRhtDiagonal + r); each sign is the
/// top bit of one 64-bit output.
std::vector<double> rht_diagonal(uint64_t seed, int round, int n);

/// Exact Haar rotation: y = Rx (Forward) or R^T x (Inverse). R is the
/// sign-fixed Q factor of a seeded iid-Gaussian matrix; see haar_matrix.
std::vector<double> haar_apply(const std::vector<double>& x,
                               const RotationSpec& spec, Direction dir);

/// RHT: Forward applies (H D_r) for r = 0..rounds-1 in order; Inverse the
/// exact adjoint in reverse. Input length must equal spec.padded_dim.
std::vector<double> rht_apply(const std::vector<double>& x,
                              const RotationSpec& spec, Direction dir);

/// y = Gx with G a dxd iid standard-normal matrix determined by seed
/// (entries row-major from the stream mix64(seed, kGaussian), no
/// normalization). Adjoint applies G^T over the identical entry stream.
std::vector<double> gaussian_apply(const std::vector<double>& x, uint64_t seed,
                                   Direction dir);

/// Forward projection, spec-facing name.
inline std::vector<double> gaussian_project(const std::vector<double>& x,
                                            uint64_t seed) {
    return gaussian_apply(x, seed, Direction::Forward);
}

/// Unified dispatch over the spec kind. Input length must be
/// spec.padded_dim (the caller pads first).
std::vector<double> rotate(const std::vector<double>& x,
                           const RotationSpec& spec, Direction dir);

namespace detail {
/// Cached dense Haar matrix as a flat row-major array (dim x dim).
/// Published through a bounded thread-safe cache keyed by (dim, seed).
std::shared_ptr<const std::vector<double>> haar_matrix(int dim, uint64_t seed);
} // namespace detail

} // namespace rotquant
