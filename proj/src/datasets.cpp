#include "rotquant/datasets.hpp"

#include "rotquant/errors.hpp"
#include "rotquant/rng.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

namespace rotquant {

namespace {

void check_shape(int count, int dim) {
    if (count < 1 || dim < 1) {
        throw InvalidDimension("dataset generation needs count, dim >= 1");
    }
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

VectorSet lognormal_vectors(int count, int dim, uint64_t seed, double mu,
                            double sigma) {
    check_shape(count, dim);
    if (!(sigma > 0.0)) throw InvalidValue("lognormal_vectors: sigma must be > 0");
    VectorSet set;
    set.dim = dim;
    set.count = count;
    set.source = VectorSet::Source::LogNormal;
    set.data.resize(static_cast<size_t>(count) * dim);
    rng::SplitMix gen(rng::mix64(seed, rng::kDataSampling));
    for (auto& v : set.data) v = std::exp(mu + sigma * gen.next_normal());
    return set;
}

VectorSet clustered_vectors(int count, int dim, int clusters, uint64_t seed,
                            double noise) {
    check_shape(count, dim);
    if (clusters < 1) throw InvalidValue("clustered_vectors: clusters must be >= 1");
    if (!(noise >= 0.0)) throw InvalidValue("clustered_vectors: noise must be >= 0");
    VectorSet centers = lognormal_vectors(clusters, dim, seed);
    VectorSet set;
    set.dim = dim;
    set.count = count;
    set.source = VectorSet::Source::Clustered;
    set.data.resize(static_cast<size_t>(count) * dim);
    rng::SplitMix gen(rng::mix64(rng::mix64(seed, rng::kDataSampling), 1));
    for (int i = 0; i < count; ++i) {
        const double* c = centers.row(static_cast<int>(gen.next_u64() % clusters));
        double* out = set.data.data() + static_cast<size_t>(i) * dim;
        for (int j = 0; j < dim; ++j) out[j] = c[j] + noise * gen.next_normal();
    }
    return set;
}

VectorSet load_fvecs(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw MalformedPayload("load_fvecs: cannot open " + path);

    VectorSet set;
    set.source = VectorSet::Source::File;
    std::vector<float> rec;
    for (;;) {
        int32_t dim = 0;
        size_t got = std::fread(&dim, sizeof dim, 1, f.get());
        if (got == 0) break; // clean EOF between records
        if (dim < 1) throw MalformedPayload("load_fvecs: bad record dimension");
        if (set.count == 0) {
            set.dim = dim;
        } else if (dim != set.dim) {
            throw MalformedPayload("load_fvecs: inconsistent record dimensions");
        }
        rec.resize(static_cast<size_t>(dim));
        if (std::fread(rec.data(), sizeof(float), rec.size(), f.get()) != rec.size()) {
            throw MalformedPayload("load_fvecs: short read");
        }
        for (float v : rec) {
            if (!std::isfinite(v)) throw MalformedPayload("load_fvecs: NaN/Inf entry");
            set.data.push_back(static_cast<double>(v));
        }
        ++set.count;
    }
    return set;
}

void store_fvecs(const std::string& path, const VectorSet& set) {
    if (set.data.size() != static_cast<size_t>(set.count) * set.dim) {
        throw InvalidDimension("store_fvecs: count*dim does not match data size");
    }
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw MalformedPayload("store_fvecs: cannot open " + path);
    std::vector<float> rec(static_cast<size_t>(set.dim));
    for (int i = 0; i < set.count; ++i) {
        int32_t dim = set.dim;
        const double* src = set.row(i);
        for (int j = 0; j < set.dim; ++j) rec[static_cast<size_t>(j)] = static_cast<float>(src[j]);
        if (std::fwrite(&dim, sizeof dim, 1, f.get()) != 1 ||
            std::fwrite(rec.data(), sizeof(float), rec.size(), f.get()) != rec.size()) {
            throw MalformedPayload("store_fvecs: short write");
        }
    }
}

} // namespace rotquant
