#include "rotquant/rotation.hpp"

#include "rotquant/errors.hpp"
#include "rotquant/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace rotquant {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_dim_positive(int d, const char* who) {
    if (d < 1) throw InvalidDimension(std::string(who) + ": dimension must be >= 1");
}

} // namespace

int next_pow2(int n) {
    check_dim_positive(n, "next_pow2");
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

RotationSpec RotationSpec::haar(int dim, uint64_t seed) {
    check_dim_positive(dim, "RotationSpec::haar");
    return {RotationKind::HaarExact, 1, seed, dim, dim};
}

RotationSpec RotationSpec::rht(int dim, uint64_t seed, int rounds) {
    check_dim_positive(dim, "RotationSpec::rht");
    if (rounds != 1 && rounds != 2) {
        throw InvalidValue("RotationSpec::rht: rounds must be 1 or 2");
    }
    return {RotationKind::Rht, rounds, seed, dim, next_pow2(dim)};
}

RotationSpec RotationSpec::gaussian(int dim, uint64_t seed) {
    check_dim_positive(dim, "RotationSpec::gaussian");
    return {RotationKind::GaussianJl, 1, seed, dim, dim};
}

void RotationSpec::validate() const {
    check_dim_positive(logical_dim, "RotationSpec");
    if (padded_dim < logical_dim) {
        throw InvalidDimension("RotationSpec: padded_dim < logical_dim");
    }
    switch (kind) {
    case RotationKind::Rht:
        if (!is_pow2(padded_dim)) {
            throw InvalidDimension("RotationSpec: RHT padded_dim must be a power of two");
        }
        if (rounds != 1 && rounds != 2) {
            throw InvalidValue("RotationSpec: RHT rounds must be 1 or 2");
        }
        break;
    case RotationKind::HaarExact:
    case RotationKind::GaussianJl:
        if (padded_dim != logical_dim) {
            throw InvalidDimension("RotationSpec: padded_dim must equal logical_dim");
        }
        break;
    }
}

std::pair<std::vector<double>, int> pad_pow2(const std::vector<double>& x) {
    int d = static_cast<int>(x.size());
    check_dim_positive(d, "pad_pow2");
    std::vector<double> out(x);
    out.resize(static_cast<size_t>(next_pow2(d)), 0.0);
    return {std::move(out), d};
}

void wht_orthonormal(std::span<double> x) {
    size_t n = x.size();
    if (!is_pow2(static_cast<int>(n))) {
        throw InvalidDimension("wht_orthonormal: length must be a power of two");
    }
    for (size_t h = 1; h < n; h <<= 1) {
        for (size_t i = 0; i < n; i += h << 1) {
            for (size_t j = i; j < i + h; ++j) {
                double a = x[j];
                double b = x[j + h];
                x[j] = a + b;
                x[j + h] = a - b;
            }
        }
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : x) v *= scale;
}

std::vector<double> rht_diagonal(uint64_t seed, int round, int n) {
    rng::SplitMix gen(rng::mix64(seed, rng::kRhtDiagonal + static_cast<uint64_t>(round)));
    std::vector<double> d(static_cast<size_t>(n));
    for (auto& s : d) s = static_cast<double>(gen.next_sign());
    return d;
}

// ---------------------------------------------------------------------------
// Haar matrix cache

namespace detail {

namespace {

struct HaarKey {
    int dim;
    uint64_t seed;
    bool operator==(const HaarKey&) const = default;
};

struct HaarKeyHash {
    size_t operator()(const HaarKey& k) const {
        return static_cast<size_t>(
            rng::splitmix_fin(k.seed ^ (0x9E37u + static_cast<uint64_t>(k.dim))));
    }
};

// Bounded FIFO cache; the cap keeps Monte-Carlo loops over many seeds from
// accumulating matrices they will never reuse.
constexpr size_t kCacheMaxDoubles = 16u << 20; // 128 MiB of float64

std::mutex g_cache_mutex;
std::unordered_map<HaarKey, std::shared_ptr<const std::vector<double>>, HaarKeyHash>
    g_cache;
std::deque<HaarKey> g_cache_order;
size_t g_cache_doubles = 0;

std::shared_ptr<const std::vector<double>> build_haar(int dim, uint64_t seed) {
    rng::SplitMix gen(rng::mix64(seed, rng::kRotationMatrix));
    Eigen::MatrixXd a(dim, dim);
    // Row-major fill so the entry stream order is part of the contract.
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            a(i, j) = gen.next_normal();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    // Fix the QR sign ambiguity: make the triangular factor's diagonal
    // positive, which makes Q Haar-distributed and reproducible.
    Eigen::VectorXd diag = qr.matrixQR().diagonal();
    for (int j = 0; j < dim; ++j) {
        if (diag(j) < 0.0) q.col(j) = -q.col(j);
    }
    auto flat = std::make_shared<std::vector<double>>(
        static_cast<size_t>(dim) * static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            (*flat)[static_cast<size_t>(i) * dim + j] = q(i, j);
        }
    }
    return flat;
}

} // namespace

std::shared_ptr<const std::vector<double>> haar_matrix(int dim, uint64_t seed) {
    check_dim_positive(dim, "haar_matrix");
    HaarKey key{dim, seed};
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = g_cache.find(key);
        if (it != g_cache.end()) return it->second;
    }
    auto mat = build_haar(dim, seed);
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto [it, inserted] = g_cache.emplace(key, mat);
        if (inserted) {
            g_cache_order.push_back(key);
            g_cache_doubles += mat->size();
            while (g_cache_doubles > kCacheMaxDoubles && g_cache_order.size() > 1) {
                HaarKey victim = g_cache_order.front();
                g_cache_order.pop_front();
                auto vit = g_cache.find(victim);
                if (vit != g_cache.end()) {
                    g_cache_doubles -= vit->second->size();
                    g_cache.erase(vit);
                }
            }
        }
        return it->second;
    }
}

} // namespace detail

// ---------------------------------------------------------------------------

std::vector<double> haar_apply(const std::vector<double>& x,
                               const RotationSpec& spec, Direction dir) {
    if (spec.kind != RotationKind::HaarExact) {
        throw InvalidValue("haar_apply: spec kind is not HaarExact");
    }
    int d = spec.logical_dim;
    check_dim_positive(d, "haar_apply");
    if (static_cast<int>(x.size()) != d) {
        throw InvalidDimension("haar_apply: input length does not match spec");
    }
    auto m = detail::haar_matrix(d, spec.seed);
    std::vector<double> y(static_cast<size_t>(d), 0.0);
    const double* r = m->data();
    if (dir == Direction::Forward) {
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            const double* row = r + static_cast<size_t>(i) * d;
            for (int j = 0; j < d; ++j) acc += row[j] * x[static_cast<size_t>(j)];
            y[static_cast<size_t>(i)] = acc;
        }
    } else {
        for (int j = 0; j < d; ++j) {
            const double* row = r + static_cast<size_t>(j) * d;
            double xj = x[static_cast<size_t>(j)];
            for (int i = 0; i < d; ++i) y[static_cast<size_t>(i)] += row[i] * xj;
        }
    }
    return y;
}

std::vector<double> rht_apply(const std::vector<double>& x,
                              const RotationSpec& spec, Direction dir) {
    if (spec.kind != RotationKind::Rht) {
        throw InvalidValue("rht_apply: spec kind is not Rht");
    }
    spec.validate();
    if (static_cast<int>(x.size()) != spec.padded_dim) {
        throw InvalidDimension("rht_apply: input length must equal padded_dim");
    }
    int n = spec.padded_dim;
    std::vector<double> y(x);
    if (dir == Direction::Forward) {
        for (int r = 0; r < spec.rounds; ++r) {
            auto d = rht_diagonal(spec.seed, r, n);
            for (int j = 0; j < n; ++j) y[static_cast<size_t>(j)] *= d[static_cast<size_t>(j)];
            wht_orthonormal(y);
        }
    } else {
        for (int r = spec.rounds - 1; r >= 0; --r) {
            wht_orthonormal(y);
            auto d = rht_diagonal(spec.seed, r, n);
            for (int j = 0; j < n; ++j) y[static_cast<size_t>(j)] *= d[static_cast<size_t>(j)];
        }
    }
    return y;
}

std::vector<double> gaussian_apply(const std::vector<double>& x, uint64_t seed,
                                   Direction dir) {
    int d = static_cast<int>(x.size());
    check_dim_positive(d, "gaussian_apply");
    rng::SplitMix gen(rng::mix64(seed, rng::kGaussian));
    std::vector<double> y(static_cast<size_t>(d), 0.0);
    // One row-major pass regenerates the same entries for both directions,
    // so G and G^T always agree for a given seed.
    if (dir == Direction::Forward) {
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += gen.next_normal() * x[static_cast<size_t>(j)];
            y[static_cast<size_t>(i)] = acc;
        }
    } else {
        for (int i = 0; i < d; ++i) {
            double xi = x[static_cast<size_t>(i)];
            for (int j = 0; j < d; ++j) y[static_cast<size_t>(j)] += gen.next_normal() * xi;
        }
    }
    return y;
}

std::vector<double> rotate(const std::vector<double>& x,
                           const RotationSpec& spec, Direction dir) {
    switch (spec.kind) {
    case RotationKind::HaarExact:
        return haar_apply(x, spec, dir);
    case RotationKind::Rht:
        return rht_apply(x, spec, dir);
    case RotationKind::GaussianJl:
        if (static_cast<int>(x.size()) != spec.logical_dim) {
            throw InvalidDimension("rotate: input length does not match spec");
        }
        return gaussian_apply(x, spec.seed, dir);
    }
    throw InvalidValue("rotate: unknown rotation kind");
}

} // namespace rotquant
