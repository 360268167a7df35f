#include "rotquant/metrics.hpp"

#include "rotquant/errors.hpp"
#include "rotquant/rng.hpp"
#include "rotquant/rotation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <thread>

namespace rotquant {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

double sq_l2_error(const std::vector<double>& x, const std::vector<double>& xhat) {
    double s = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
        double e = x[j] - xhat[j];
        s += e * e;
    }
    return s;
}

// Index-ordered work distribution; results are written to disjoint slots so
// the aggregate is independent of the thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads == 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
    }
    threads = std::min(std::max(threads, 1), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

RotationSpec sweep_spec(MethodTag tag, int dim, uint64_t seed,
                        const SweepConfig& config) {
    if (tag == MethodTag::Qjl) return RotationSpec::gaussian(dim, seed);
    bool haar = config.rotation == RotationPolicy::ForceHaar ||
                (config.rotation == RotationPolicy::Auto && dim <= 1024);
    return haar ? RotationSpec::haar(dim, seed)
                : RotationSpec::rht(dim, seed, config.rht_rounds);
}

std::vector<double> qjl_signs(const QuantizedVector& qv) {
    auto bits = unpack_indices(qv.indices, 1, qv.padded_dim());
    std::vector<double> s(bits.size());
    for (size_t j = 0; j < s.size(); ++j) s[j] = bits[j] ? 1.0 : -1.0;
    return s;
}

} // namespace

std::string metric_name(Metric m) {
    switch (m) {
    case Metric::Vnmse: return "vnmse";
    case Metric::Mse: return "mse";
    case Metric::InnerSqError: return "inner_sq_error";
    case Metric::Recall: return "recall";
    }
    return "?";
}

Metric parse_metric(const std::string& name) {
    if (name == "vnmse") return Metric::Vnmse;
    if (name == "mse") return Metric::Mse;
    if (name == "inner_sq_error") return Metric::InnerSqError;
    if (name == "recall") return Metric::Recall;
    throw InvalidConfig("unknown metric: " + name);
}

double vnmse(const std::vector<double>& x, const std::vector<double>& xhat) {
    if (x.size() != xhat.size()) throw InvalidDimension("vnmse: length mismatch");
    double nx = 0.0;
    for (double v : x) nx += v * v;
    if (nx == 0.0) throw InvalidValue("vnmse: zero reference vector");
    return sq_l2_error(x, xhat) / nx;
}

double inner_sq_error(const std::vector<double>& x,
                      const std::vector<double>& xhat,
                      const std::vector<double>& y) {
    if (x.size() != xhat.size() || x.size() != y.size()) {
        throw InvalidDimension("inner_sq_error: length mismatch");
    }
    double e = dot(y, x) - dot(y, xhat);
    return e * e;
}

int default_pair_schedule(int dim) {
    if (dim <= 128) return 256;
    if (dim <= 256) return 128;
    if (dim <= 1024) return 64;
    if (dim <= 2048) return 32;
    return 16;
}

std::vector<ExperimentRow> run_paired_sweep(const SweepConfig& config) {
    if (config.methods.empty()) throw InvalidConfig("sweep: no methods given");
    if (config.dims.empty()) throw InvalidConfig("sweep: no dimensions given");
    if (config.bits.empty()) throw InvalidConfig("sweep: no bit widths given");
    if (config.metric == Metric::Recall) {
        throw InvalidConfig("sweep: recall is computed by recall_at_k");
    }
    for (int d : config.dims) {
        if (d < 1) throw InvalidConfig("sweep: dimensions must be >= 1");
    }

    // (method, bits) grid; the one-bit-only sketch is skipped at higher widths.
    std::vector<MethodKind> combos;
    for (MethodTag tag : config.methods) {
        for (int b : config.bits) {
            if (b < 1 || b > 8) throw InvalidConfig("sweep: bits must be in 1..8");
            if (tag == MethodTag::Qjl && b != 1) continue;
            combos.push_back({tag, b});
        }
    }
    if (combos.empty()) throw InvalidConfig("sweep: no valid method/bits combination");

    uint64_t data_root = rng::mix64(config.master_seed, rng::kDataSampling);
    uint64_t quant_root = rng::mix64(config.master_seed, rng::kSweepQuantizer);
    bool needs_query = config.metric == Metric::InnerSqError;

    std::vector<ExperimentRow> rows;
    for (int dim : config.dims) {
        int n = config.fixed_pairs > 0 ? config.fixed_pairs
                                       : default_pair_schedule(dim);
        uint64_t cell_data = rng::mix64(data_root, static_cast<uint64_t>(dim));
        uint64_t cell_q = rng::mix64(quant_root, static_cast<uint64_t>(dim));

        std::vector<std::vector<double>> vals(
            combos.size(), std::vector<double>(static_cast<size_t>(n)));

        parallel_for(n, config.threads, [&](int i) {
            uint64_t x_seed = rng::mix64(cell_data, 2 * static_cast<uint64_t>(i));
            uint64_t y_seed = rng::mix64(cell_data, 2 * static_cast<uint64_t>(i) + 1);
            uint64_t quant_seed = rng::mix64(cell_q, static_cast<uint64_t>(i));

            std::vector<double> x =
                lognormal_vectors(1, dim, x_seed, config.lognormal_mu,
                                  config.lognormal_sigma)
                    .data;
            std::vector<double> y;
            if (needs_query) {
                y = lognormal_vectors(1, dim, y_seed, config.lognormal_mu,
                                      config.lognormal_sigma)
                        .data;
            }

            for (size_t c = 0; c < combos.size(); ++c) {
                RotationSpec spec =
                    sweep_spec(combos[c].tag, dim, quant_seed, config);
                QuantizedVector qv = quantize(x, combos[c], spec);
                double v = 0.0;
                switch (config.metric) {
                case Metric::Vnmse:
                    v = vnmse(x, dequantize(qv));
                    break;
                case Metric::Mse:
                    v = sq_l2_error(x, dequantize(qv));
                    break;
                case Metric::InnerSqError: {
                    double err = dot(y, x) - estimate_inner(qv, y);
                    v = err * err;
                    break;
                }
                case Metric::Recall:
                    break; // rejected above
                }
                vals[c][static_cast<size_t>(i)] = v;
            }
        });

        // Sequential index-ordered reduction keeps results thread-count free.
        for (size_t c = 0; c < combos.size(); ++c) {
            double mean = 0.0;
            for (double v : vals[c]) mean += v;
            mean /= n;
            double var = 0.0;
            for (double v : vals[c]) var += (v - mean) * (v - mean);
            double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
            ExperimentRow row;
            row.method = combos[c];
            row.dim = dim;
            row.bits = combos[c].bits;
            row.metric = config.metric;
            row.mean = mean;
            row.sample_std = sd;
            row.pairs = n;
            row.ci95_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(n));
            rows.push_back(row);
        }
    }

    std::sort(rows.begin(), rows.end(), [](const ExperimentRow& a,
                                           const ExperimentRow& b) {
        auto ka = std::tuple(static_cast<int>(a.method.tag), a.dim, a.bits);
        auto kb = std::tuple(static_cast<int>(b.method.tag), b.dim, b.bits);
        return ka < kb;
    });
    return rows;
}

std::vector<double> paired_inner_errors(const SweepConfig& config,
                                        MethodKind method, int dim) {
    method.validate();
    if (dim < 1) throw InvalidConfig("paired_inner_errors: dim must be >= 1");
    int n = config.fixed_pairs > 0 ? config.fixed_pairs
                                   : default_pair_schedule(dim);
    uint64_t cell_data = rng::mix64(rng::mix64(config.master_seed, rng::kDataSampling),
                                    static_cast<uint64_t>(dim));
    uint64_t cell_q = rng::mix64(rng::mix64(config.master_seed, rng::kSweepQuantizer),
                                 static_cast<uint64_t>(dim));
    std::vector<double> errors(static_cast<size_t>(n));
    parallel_for(n, config.threads, [&](int i) {
        uint64_t x_seed = rng::mix64(cell_data, 2 * static_cast<uint64_t>(i));
        uint64_t y_seed = rng::mix64(cell_data, 2 * static_cast<uint64_t>(i) + 1);
        uint64_t quant_seed = rng::mix64(cell_q, static_cast<uint64_t>(i));
        std::vector<double> x =
            lognormal_vectors(1, dim, x_seed, config.lognormal_mu,
                              config.lognormal_sigma)
                .data;
        std::vector<double> y =
            lognormal_vectors(1, dim, y_seed, config.lognormal_mu,
                              config.lognormal_sigma)
                .data;
        RotationSpec spec = sweep_spec(method.tag, dim, quant_seed, config);
        QuantizedVector qv = quantize(x, method, spec);
        errors[static_cast<size_t>(i)] = dot(y, x) - estimate_inner(qv, y);
    });
    return errors;
}

double recall_at_k(const VectorSet& base, const VectorSet& queries, int k,
                   std::optional<MethodKind> method,
                   const RotationSpec& rotation, uint64_t master_seed) {
    if (base.count < 1 || queries.count < 1) {
        throw InvalidConfig("recall_at_k: empty base or query set");
    }
    if (base.dim != queries.dim) {
        throw InvalidDimension("recall_at_k: base/query dimension mismatch");
    }
    if (k < 1 || k > base.count) {
        throw InvalidConfig("recall_at_k: k must be in 1..|base|");
    }

    RotationSpec spec = rotation;
    spec.seed = rng::mix64(master_seed, rng::kSweepQuantizer);
    spec.validate();
    if (spec.logical_dim != base.dim) {
        throw InvalidDimension("recall_at_k: rotation spec dimension mismatch");
    }

    int d = base.dim;
    int padded = spec.padded_dim;

    // Quantize the base once under the shared spec; keep rotated-domain
    // codewords / sign rows so each query is rotated a single time.
    bool identity = !method.has_value();
    bool has_stage1 = false, has_signs = false;
    std::vector<double> w;      // base.count x padded rotated codewords
    std::vector<double> s1;     // codeword scales
    std::vector<double> sigma;  // base.count x d sign rows
    std::vector<double> s2;     // sign-row scales
    uint64_t gauss_seed = 0;
    if (!identity) {
        MethodKind mk = *method;
        mk.validate();
        has_stage1 = mk.tag != MethodTag::Qjl;
        has_signs = mk.tag == MethodTag::Qjl || mk.tag == MethodTag::TurboQuantProd;
        if (has_stage1) w.assign(static_cast<size_t>(base.count) * padded, 0.0);
        s1.assign(static_cast<size_t>(base.count), 0.0);
        if (has_signs) {
            sigma.assign(static_cast<size_t>(base.count) * d, 0.0);
            s2.assign(static_cast<size_t>(base.count), 0.0);
        }
        gauss_seed = mk.tag == MethodTag::Qjl
                         ? spec.seed
                         : rng::mix64(spec.seed, rng::kResidualStage);
        for (int i = 0; i < base.count; ++i) {
            QuantizedVector qv = quantize(base.row_vec(i), mk, spec);
            if (mk.tag == MethodTag::Qjl) {
                s2[static_cast<size_t>(i)] = qv.total_scale;
                auto sg = qjl_signs(qv);
                std::copy(sg.begin(), sg.end(),
                          sigma.begin() + static_cast<size_t>(i) * d);
                continue;
            }
            s1[static_cast<size_t>(i)] = qv.total_scale;
            if (qv.total_scale != 0.0 && qv.index_bits() > 0) {
                auto cw = detail::rotated_codeword(qv);
                std::copy(cw.begin(), cw.end(),
                          w.begin() + static_cast<size_t>(i) * padded);
            }
            if (mk.tag == MethodTag::TurboQuantProd) {
                s2[static_cast<size_t>(i)] = qv.stage2->total_scale;
                auto sg = qjl_signs(*qv.stage2);
                std::copy(sg.begin(), sg.end(),
                          sigma.begin() + static_cast<size_t>(i) * d);
            }
        }
    }

    auto top_k = [&](const std::vector<double>& scores) {
        std::vector<int> idx(static_cast<size_t>(base.count));
        for (int i = 0; i < base.count; ++i) idx[static_cast<size_t>(i)] = i;
        std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                          [&](int a, int b) {
                              double sa = scores[static_cast<size_t>(a)];
                              double sb = scores[static_cast<size_t>(b)];
                              return sa != sb ? sa > sb : a < b;
                          });
        idx.resize(static_cast<size_t>(k));
        std::sort(idx.begin(), idx.end());
        return idx;
    };

    double hits = 0.0;
    std::vector<double> exact(static_cast<size_t>(base.count));
    std::vector<double> est(static_cast<size_t>(base.count));
    for (int q = 0; q < queries.count; ++q) {
        std::vector<double> qvec = queries.row_vec(q);
        for (int i = 0; i < base.count; ++i) {
            const double* b = base.row(i);
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += qvec[static_cast<size_t>(j)] * b[j];
            exact[static_cast<size_t>(i)] = s;
        }
        if (identity) {
            est = exact;
        } else {
            std::vector<double> rq;
            if (has_stage1) {
                std::vector<double> qp(qvec);
                qp.resize(static_cast<size_t>(padded), 0.0);
                rq = rotate(qp, spec, Direction::Forward);
            }
            std::vector<double> gq;
            if (has_signs) gq = gaussian_apply(qvec, gauss_seed, Direction::Forward);
            for (int i = 0; i < base.count; ++i) {
                double s = 0.0;
                if (has_stage1 && s1[static_cast<size_t>(i)] != 0.0) {
                    const double* row = w.data() + static_cast<size_t>(i) * padded;
                    double acc = 0.0;
                    for (int j = 0; j < padded; ++j) acc += rq[static_cast<size_t>(j)] * row[j];
                    s += s1[static_cast<size_t>(i)] * acc;
                }
                if (has_signs && s2[static_cast<size_t>(i)] != 0.0) {
                    const double* row = sigma.data() + static_cast<size_t>(i) * d;
                    double acc = 0.0;
                    for (int j = 0; j < d; ++j) acc += gq[static_cast<size_t>(j)] * row[j];
                    s += s2[static_cast<size_t>(i)] * acc;
                }
                est[static_cast<size_t>(i)] = s;
            }
        }
        auto truth = top_k(exact);
        auto found = top_k(est);
        std::vector<int> common;
        std::set_intersection(truth.begin(), truth.end(), found.begin(),
                              found.end(), std::back_inserter(common));
        hits += static_cast<double>(common.size()) / k;
    }
    return hits / queries.count;
}

std::string rows_to_csv(const std::vector<ExperimentRow>& rows) {
    std::string out = "method,dim,bits,metric,mean,std,pairs,ci95\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%s,%.17g,%.17g,%d,%.17g\n",
                      r.method.name().c_str(), r.dim, r.bits,
                      metric_name(r.metric).c_str(), r.mean, r.sample_std,
                      r.pairs, r.ci95_halfwidth);
        out += buf;
    }
    return out;
}

} // namespace rotquant
