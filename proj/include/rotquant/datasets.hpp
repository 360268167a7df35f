#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rotquant {

/// A row-major set of vectors: float64 in memory, float32 on disk (fvecs).
struct VectorSet {
    enum class Source { LogNormal, Clustered, File };

    int dim = 0;
    int count = 0;
    std::vector<double> data; // count * dim entries, row-major
    Source source = Source::File;

    const double* row(int i) const { return data.data() + static_cast<size_t>(i) * dim; }
    std::vector<double> row_vec(int i) const {
        return {row(i), row(i) + dim};
    }
};

/// count x dim entries exp(mu + sigma * N(0,1)), reproducible for a given
/// (seed, count, dim); draws come from the library-wide data stream of `seed`.
VectorSet lognormal_vectors(int count, int dim, uint64_t seed, double mu = 0.0,
                            double sigma = 1.0);

/// count x dim points around `clusters` lognormal centers with Gaussian
/// within-cluster noise; a deterministic stand-in corpus for recall runs.
VectorSet clustered_vectors(int count, int dim, int clusters, uint64_t seed,
                            double noise = 0.05);

/// fvecs layout: per record an int32 little-endian dimension then dim
/// float32 values; every record must share one dimension.
VectorSet load_fvecs(const std::string& path);
void store_fvecs(const std::string& path, const VectorSet& set);

} // namespace rotquant
