#pragma once

#include <cstdint>

namespace rotquant::rng {

// Seed-derivation contract shared by every randomized component (and by any
// reimplementation that wants bit-identical streams):
//
//   child_seed = mix64(parent_seed, stream_id)
//              = splitmix_fin(parent_seed XOR kGolden * stream_id)
//
// where splitmix_fin is the SplitMix64 finalizer (Steele, Lea, Flood 2014)
// and kGolden is the 64-bit golden-ratio constant. Stream ids are fixed
// constants, one per use (see Stream below).
//
// The stream generator itself is plain SplitMix64: output i of a stream with
// key k is splitmix_fin(k + kGolden * (i+1)). It is counter-based, so any
// output can be produced without generating its predecessors.

inline constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr uint64_t splitmix_fin(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr uint64_t mix64(uint64_t seed, uint64_t stream_id) {
    return splitmix_fin(seed ^ (kGolden * stream_id));
}

// Documented stream ids. Keep stable: payloads and paired-seed sweeps
// depend on them.
enum Stream : uint64_t {
    kRotationMatrix = 1,  // Haar matrix entries
    kRhtDiagonal = 16,    // RHT sign diagonal, round r uses 16 + r (r = 0, 1)
    kGaussian = 32,       // Gaussian-JL projection entries
    kResidualStage = 33,  // two-stage residual quantizer, stage-2 spec seed
    kDataSampling = 64,   // synthetic data generation
    kSweepQuantizer = 65, // per-pair quantizer seeds in paired sweeps
};

class SplitMix {
public:
    explicit SplitMix(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += kGolden;
        return splitmix_fin(state_);
    }

    /// Uniform in the open interval (0, 1).
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the inverse CDF (see special.hpp); fixed method
    /// so streams are reproducible across implementations.
    double next_normal();

    /// Random sign, +1 or -1 (top output bit).
    int next_sign() { return (next_u64() >> 63) ? -1 : 1; }

private:
    uint64_t state_;
};

} // namespace rotquant::rng
