#pragma once

#include "rotquant/datasets.hpp"
#include "rotquant/quantizer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rotquant {

enum class Metric { Vnmse, Mse, InnerSqError, Recall };

std::string metric_name(Metric m);
Metric parse_metric(const std::string& name);

/// One aggregated sweep cell.
struct ExperimentRow {
    MethodKind method;
    int dim = 0;
    int bits = 0;
    Metric metric = Metric::Vnmse;
    double mean = 0.0;
    double sample_std = 0.0; // n-1 denominator; 0 when pairs == 1
    int pairs = 0;
    double ci95_halfwidth = 0.0; // 1.96 * sample_std / sqrt(pairs)
};

/// ||x - xhat||^2 / ||x||^2. Zero x -> InvalidValue.
double vnmse(const std::vector<double>& x, const std::vector<double>& xhat);

/// (<y,x> - <y,xhat>)^2.
double inner_sq_error(const std::vector<double>& x,
                      const std::vector<double>& xhat,
                      const std::vector<double>& y);

/// Which rotation backs the codebook methods in a sweep.
enum class RotationPolicy {
    Auto,      // exact uniform rotation for d <= 1024, fast transform above
    ForceHaar, // exact uniform rotation everywhere
    ForceRht,  // fast transform everywhere (dims padded to powers of two)
};

struct SweepConfig {
    std::vector<MethodTag> methods;
    std::vector<int> dims;
    std::vector<int> bits;
    Metric metric = Metric::Vnmse;
    uint64_t master_seed = 1;
    RotationPolicy rotation = RotationPolicy::Auto;
    int rht_rounds = 2;
    int fixed_pairs = 0;          // 0 = per-dimension default schedule
    double lognormal_mu = 0.0;    // mean shift for signal-strength studies
    double lognormal_sigma = 1.0;
    int threads = 0;              // 0 = hardware concurrency
};

/// Default pair counts: 256 for d <= 128, 128 at 256, 64 at 512-1024,
/// 32 at 2048, 16 for d >= 4096.
int default_pair_schedule(int dim);

/// Paired-seed protocol: per (dim, pair) one input vector and one quantizer
/// seed are drawn from master_seed and shared by every (method, bits) cell,
/// so methods are compared on identical draws. Output is sorted by
/// (method, dim, bits) and is bit-identical for any thread count.
std::vector<ExperimentRow> run_paired_sweep(const SweepConfig& config);

/// Per-pair signed inner-product estimation errors <y,x> - estimate, drawn
/// under exactly the paired-seed scheme of run_paired_sweep (config.metric
/// is ignored). One value per pair, in pair order.
std::vector<double> paired_inner_errors(const SweepConfig& config,
                                        MethodKind method, int dim);

/// Mean over queries of |top-k by estimate_inner  ∩  top-k by exact inner
/// product| / k, quantizing every base vector under one shared spec whose
/// seed derives from master_seed. method = nullopt scores exact inner
/// products on both sides (identity debug mode, recall 1).
double recall_at_k(const VectorSet& base, const VectorSet& queries, int k,
                   std::optional<MethodKind> method,
                   const RotationSpec& rotation, uint64_t master_seed);

/// CSV with header "method,dim,bits,metric,mean,std,pairs,ci95".
std::string rows_to_csv(const std::vector<ExperimentRow>& rows);

} // namespace rotquant
