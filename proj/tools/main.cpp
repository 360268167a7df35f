#include "rotquant/analysis.hpp"
#include "rotquant/codebook.hpp"
#include "rotquant/datasets.hpp"
#include "rotquant/errors.hpp"
#include "rotquant/metrics.hpp"
#include "rotquant/quantizer.hpp"
#include "rotquant/rng.hpp"
#include "rotquant/rotation.hpp"
#include "rotquant/svg.hpp"
#include "rotquant/version.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rotquant;

namespace {

// Exit codes: 0 success, 2 usage/config error, 3 data/payload/numeric error.
constexpr int kUsageError = 2;
constexpr int kDataError = 3;

std::vector<MethodTag> parse_methods(const std::string& csv) {
    std::vector<MethodTag> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_method_tag(item));
    }
    if (out.empty()) throw InvalidConfig("empty method list");
    return out;
}

std::vector<int> parse_ints(const std::string& csv, const char* what) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) {
            throw InvalidConfig(std::string("bad ") + what + " entry: " + item);
        }
        out.push_back(v);
    }
    if (out.empty()) throw InvalidConfig(std::string("empty ") + what + " list");
    return out;
}

RotationPolicy parse_policy(const std::string& name) {
    if (name == "auto") return RotationPolicy::Auto;
    if (name == "haar") return RotationPolicy::ForceHaar;
    if (name == "rht") return RotationPolicy::ForceRht;
    throw InvalidConfig("unknown rotation policy: " + name);
}

RotationSpec spec_for(MethodTag tag, int dim, uint64_t seed,
                      RotationPolicy policy, int rounds) {
    if (tag == MethodTag::Qjl) return RotationSpec::gaussian(dim, seed);
    bool haar = policy == RotationPolicy::ForceHaar ||
                (policy == RotationPolicy::Auto && dim <= 1024);
    return haar ? RotationSpec::haar(dim, seed)
                : RotationSpec::rht(dim, seed, rounds);
}

// --data lognormal:count,dim | clustered:count,dim | fvecs:path
VectorSet load_data(const std::string& spec, uint64_t seed, int clusters) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw InvalidConfig("data spec needs kind:args, got " + spec);
    }
    std::string kind = spec.substr(0, colon);
    std::string args = spec.substr(colon + 1);
    if (kind == "fvecs") return load_fvecs(args);
    auto nums = parse_ints(args, "data");
    if (nums.size() != 2) {
        throw InvalidConfig("data spec needs count,dim: " + spec);
    }
    if (kind == "lognormal") return lognormal_vectors(nums[0], nums[1], seed);
    if (kind == "clustered") {
        return clustered_vectors(nums[0], nums[1], clusters, seed);
    }
    throw InvalidConfig("unknown data kind: " + kind);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MalformedPayload("cannot open for write: " + path.string());
    out << content;
    if (!out) throw MalformedPayload("short write: " + path.string());
}

void write_manifest(const fs::path& dir, const std::string& command,
                    uint64_t seed, const json& config,
                    const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["version"] = ROTQUANT_VERSION;
    m["seed"] = seed;
    m["config"] = config;
    m["outputs"] = outputs;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int cmd_codebook(int bits) {
    const Codebook& cb = cached_codebook(bits);
    json j;
    j["bits"] = cb.bits;
    j["centroids"] = cb.centroids;
    j["boundaries"] = cb.boundaries;
    j["expected_distortion"] = cb.expected_distortion;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_oracle(const std::string& what, int d, int b, double t,
               const std::string& method) {
    json j;
    j["what"] = what;
    if (what == "coord-cdf") {
        j["d"] = d;
        j["t"] = t;
        j["value"] = analysis::coord_cdf(d, t);
    } else if (what == "exact-1bit") {
        j["d"] = d;
        j["value"] = analysis::exact_vnmse_1bit_biased(d);
    } else if (what == "tq-bound") {
        j["b"] = b;
        j["value"] = analysis::turboquant_mse_bound(b);
    } else if (what == "asymptotic") {
        MethodKind mk{parse_method_tag(method), 1};
        j["method"] = mk.name();
        j["value"] = analysis::asymptotic_vnmse(mk);
    } else if (what == "expected-vnmse") {
        j["b"] = b;
        j["d"] = d;
        j["value"] = analysis::expected_vnmse_biased(b, d);
    } else {
        throw InvalidConfig("unknown oracle: " + what);
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

struct SweepFlags {
    std::string methods = "eden-biased,tq-mse";
    std::string dims = "16,32,64,128,256,512,1024,2048,4096";
    std::string bits = "1,2,3,4";
    std::string metric = "vnmse";
    std::string rotation = "auto";
    std::string out = "out";
    uint64_t seed = 1;
    int pairs = -1; // -1 = per-dimension schedule
    int rounds = 2;
    int threads = 0;
    double mu = 0.0;
    double sigma = 1.0;
};

SweepConfig to_config(const SweepFlags& f) {
    if (f.pairs == 0) throw InvalidConfig("zero pairs requested");
    SweepConfig cfg;
    cfg.methods = parse_methods(f.methods);
    cfg.dims = parse_ints(f.dims, "dims");
    cfg.bits = parse_ints(f.bits, "bits");
    cfg.metric = parse_metric(f.metric);
    cfg.master_seed = f.seed;
    cfg.rotation = parse_policy(f.rotation);
    cfg.rht_rounds = f.rounds;
    cfg.fixed_pairs = f.pairs < 0 ? 0 : f.pairs;
    cfg.lognormal_mu = f.mu;
    cfg.lognormal_sigma = f.sigma;
    cfg.threads = f.threads;
    return cfg;
}

json config_json(const SweepFlags& f) {
    return json{{"methods", f.methods}, {"dims", f.dims},
                {"bits", f.bits},       {"metric", f.metric},
                {"rotation", f.rotation}, {"pairs", f.pairs},
                {"rounds", f.rounds},   {"threads", f.threads},
                {"mu", f.mu},           {"sigma", f.sigma}};
}

int cmd_sweep(const SweepFlags& f) {
    SweepConfig cfg = to_config(f);
    auto rows = run_paired_sweep(cfg);
    fs::create_directories(f.out);
    std::vector<std::string> outputs;

    write_file(fs::path(f.out) / "sweep.csv", rows_to_csv(rows));
    outputs.push_back("sweep.csv");

    for (int b : cfg.bits) {
        std::vector<svg::Series> series;
        for (MethodTag tag : cfg.methods) {
            svg::Series s;
            s.name = MethodKind{tag, 1}.name();
            for (const auto& r : rows) {
                if (r.method.tag != tag || r.bits != b) continue;
                s.x.push_back(r.dim);
                s.y.push_back(r.mean);
                s.yerr.push_back(r.ci95_halfwidth);
            }
            if (!s.x.empty()) series.push_back(std::move(s));
        }
        if (series.empty()) continue;
        std::string name = "sweep_b" + std::to_string(b) + ".svg";
        write_file(fs::path(f.out) / name,
                   svg::line_chart(cfg.metric == Metric::Vnmse
                                       ? "vNMSE vs dimension, b=" + std::to_string(b)
                                       : metric_name(cfg.metric) +
                                             " vs dimension, b=" + std::to_string(b),
                                   "dimension", metric_name(cfg.metric), series,
                                   /*log2_x=*/true));
        outputs.push_back(name);
    }
    write_manifest(f.out, "sweep", f.seed, config_json(f), outputs);
    std::cout << "wrote " << outputs.size() << " files to " << f.out << "\n";
    return 0;
}

int cmd_hist(const SweepFlags& f, int dim, int bins) {
    if (f.pairs == 0) throw InvalidConfig("zero pairs requested");
    if (bins < 1) throw InvalidConfig("bins must be >= 1");
    SweepConfig cfg = to_config(f);
    cfg.dims = {dim};
    cfg.metric = Metric::InnerSqError;

    struct Cell {
        MethodKind method;
        std::vector<double> errors;
    };
    std::vector<Cell> cells;
    for (MethodTag tag : cfg.methods) {
        for (int b : cfg.bits) {
            if (b < 1 || b > 8) throw InvalidConfig("bits must be in 1..8");
            if (tag == MethodTag::Qjl && b != 1) continue;
            MethodKind mk{tag, b};
            cells.push_back({mk, paired_inner_errors(cfg, mk, dim)});
        }
    }
    if (cells.empty()) throw InvalidConfig("no valid method/bits combination");

    fs::create_directories(f.out);
    std::string csv = "method,dim,bits,pair,error\n";
    char buf[160];
    for (const auto& c : cells) {
        for (size_t i = 0; i < c.errors.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%d,%d,%zu,%.17g\n",
                          c.method.name().c_str(), dim, c.method.bits, i,
                          c.errors[i]);
            csv += buf;
        }
    }
    write_file(fs::path(f.out) / "hist.csv", csv);

    // Panel grid mirroring the two estimator families: top row inner-product
    // (unbiased) methods, bottom row reconstruction (least-squares) methods.
    auto is_prod_family = [](MethodTag t) {
        return t == MethodTag::EdenUnbiased || t == MethodTag::TurboQuantProd ||
               t == MethodTag::Qjl;
    };
    std::vector<svg::HistPanel> panels;
    for (int family = 0; family < 2; ++family) {
        for (int b : cfg.bits) {
            svg::HistPanel panel;
            panel.title = std::string(family == 0 ? "prod-family" : "mse-family") +
                          ", b=" + std::to_string(b);
            double peak = 0.0;
            std::vector<const Cell*> members;
            for (const auto& c : cells) {
                if (c.method.bits != b) continue;
                if (is_prod_family(c.method.tag) != (family == 0)) continue;
                members.push_back(&c);
                for (double e : c.errors) peak = std::max(peak, std::fabs(e));
            }
            if (members.empty()) continue;
            if (peak == 0.0) peak = 1.0;
            panel.lo = -peak;
            panel.hi = peak;
            for (const Cell* c : members) {
                panel.traces.push_back(
                    {c->method.name(),
                     svg::bin_counts(c->errors, panel.lo, panel.hi, bins)});
            }
            panels.push_back(std::move(panel));
        }
    }
    std::vector<std::string> outputs{"hist.csv"};
    if (!panels.empty()) {
        write_file(fs::path(f.out) / "hist.svg",
                   svg::histogram_grid("inner-product error, d=" +
                                           std::to_string(dim),
                                       panels,
                                       static_cast<int>(cfg.bits.size())));
        outputs.push_back("hist.svg");
    }
    json jc = config_json(f);
    jc["dim"] = dim;
    jc["bins"] = bins;
    write_manifest(f.out, "hist", f.seed, jc, outputs);
    std::cout << "wrote " << outputs.size() << " files to " << f.out << "\n";
    return 0;
}

int cmd_recall(const std::string& data, int queries, int k,
               const std::string& methods, const std::string& bits,
               uint64_t seed, bool identity, int clusters,
               const std::string& rotation, int rounds, const std::string& out) {
    VectorSet all = load_data(data, seed, clusters);
    if (queries < 1 || queries >= all.count) {
        throw InvalidConfig("need 1 <= queries < count");
    }
    VectorSet base, query;
    base.dim = query.dim = all.dim;
    base.count = all.count - queries;
    query.count = queries;
    base.data.assign(all.data.begin(),
                     all.data.begin() + static_cast<size_t>(base.count) * all.dim);
    query.data.assign(all.data.begin() + static_cast<size_t>(base.count) * all.dim,
                      all.data.end());
    RotationPolicy policy = parse_policy(rotation);

    std::string csv = "method,dim,bits,metric,mean,std,pairs,ci95\n";
    char buf[160];
    auto add_row = [&](const std::string& name, int b, double recall) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,recall,%.17g,0,%d,0\n",
                      name.c_str(), all.dim, b, recall, queries);
        csv += buf;
    };
    if (identity) {
        RotationSpec spec = RotationSpec::haar(all.dim, 0);
        add_row("identity", 0,
                recall_at_k(base, query, k, std::nullopt, spec, seed));
    }
    for (MethodTag tag : parse_methods(methods)) {
        for (int b : parse_ints(bits, "bits")) {
            if (tag == MethodTag::Qjl && b != 1) continue;
            RotationSpec spec = spec_for(tag, all.dim, 0, policy, rounds);
            add_row(MethodKind{tag, b}.name(), b,
                    recall_at_k(base, query, k, MethodKind{tag, b}, spec, seed));
        }
    }
    fs::create_directories(out);
    write_file(fs::path(out) / "recall.csv", csv);
    write_manifest(out, "recall", seed,
                   json{{"data", data}, {"queries", queries}, {"k", k},
                        {"methods", methods}, {"bits", bits},
                        {"identity", identity}, {"clusters", clusters},
                        {"rotation", rotation}, {"rounds", rounds}},
                   {"recall.csv"});
    std::cout << csv;
    return 0;
}

int cmd_quantize(const std::string& input, const std::string& method_name,
                 int bits, uint64_t seed, const std::string& rotation,
                 int rounds, const std::string& output) {
    VectorSet set = load_fvecs(input);
    MethodKind mk{parse_method_tag(method_name), bits};
    mk.validate();
    RotationPolicy policy = parse_policy(rotation);

    std::vector<uint8_t> blob;
    uint32_t count = static_cast<uint32_t>(set.count);
    for (int k = 0; k < 4; ++k) blob.push_back(static_cast<uint8_t>(count >> (8 * k)));
    for (int i = 0; i < set.count; ++i) {
        RotationSpec spec = spec_for(mk.tag, set.dim, seed, policy, rounds);
        QuantizedVector qv = quantize(set.row_vec(i), mk, spec);
        auto bytes = serialize(qv);
        blob.insert(blob.end(), bytes.begin(), bytes.end());
    }
    std::ofstream outf(output, std::ios::binary);
    if (!outf) throw MalformedPayload("cannot open for write: " + output);
    outf.write(reinterpret_cast<const char*>(blob.data()),
               static_cast<std::streamsize>(blob.size()));
    if (!outf) throw MalformedPayload("short write: " + output);
    outf.close();

    json m{{"command", "quantize"}, {"version", ROTQUANT_VERSION},
           {"seed", seed},          {"input", input},
           {"method", mk.name()},   {"bits", bits},
           {"rotation", rotation},  {"rounds", rounds},
           {"count", set.count},    {"dim", set.dim}};
    write_file(output + ".manifest.json", m.dump(2) + "\n");
    std::cout << "quantized " << set.count << " vectors (dim " << set.dim
              << ") to " << output << "\n";
    return 0;
}

int cmd_dequantize(const std::string& input, const std::string& output) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw MalformedPayload("cannot open: " + input);
    std::vector<uint8_t> blob((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    if (blob.size() < 4) throw MalformedPayload("missing count header");
    uint32_t count = 0;
    for (int k = 0; k < 4; ++k) count |= static_cast<uint32_t>(blob[static_cast<size_t>(k)]) << (8 * k);

    VectorSet set;
    size_t pos = 4;
    for (uint32_t i = 0; i < count; ++i) {
        QuantizedVector qv = deserialize_prefix(blob, pos);
        std::vector<double> x = dequantize(qv);
        if (i == 0) {
            set.dim = static_cast<int>(x.size());
        } else if (static_cast<int>(x.size()) != set.dim) {
            throw MalformedPayload("records disagree on dimension");
        }
        set.data.insert(set.data.end(), x.begin(), x.end());
        ++set.count;
    }
    if (pos != blob.size()) throw MalformedPayload("trailing bytes after records");
    store_fvecs(output, set);

    json m{{"command", "dequantize"}, {"version", ROTQUANT_VERSION},
           {"input", input},          {"count", set.count},
           {"dim", set.dim}};
    write_file(output + ".manifest.json", m.dump(2) + "\n");
    std::cout << "dequantized " << set.count << " vectors (dim " << set.dim
              << ") to " << output << "\n";
    return 0;
}

int cmd_calibrate(uint64_t seed, int threads) {
    using std::numbers::pi;
    int failures = 0;
    auto report = [&](const std::string& name, double value, double reference,
                      double tol, const std::string& kind) {
        bool ok = std::fabs(value - reference) <= tol;
        failures += ok ? 0 : 1;
        std::printf("[%s] %-44s value=%.6f reference=%.6f (%s tol %.4g)\n",
                    ok ? "PASS" : "FAIL", name.c_str(), value, reference,
                    kind.c_str(), tol);
    };

    // Least-squares 1-bit law at several dimensions. Four standard errors
    // keeps the false-alarm rate per cell near 6e-5, so a clean build does
    // not flag statistical flukes at unlucky seeds.
    {
        SweepConfig cfg;
        cfg.methods = {MethodTag::EdenBiased};
        cfg.dims = {16, 64, 256};
        cfg.bits = {1};
        cfg.master_seed = seed;
        cfg.rotation = RotationPolicy::ForceHaar;
        cfg.threads = threads;
        for (const auto& r : run_paired_sweep(cfg)) {
            double se = r.sample_std / std::sqrt(static_cast<double>(r.pairs));
            report("eden-biased b=1 d=" + std::to_string(r.dim), r.mean,
                   analysis::exact_vnmse_1bit_biased(r.dim), 4 * se, "4 SE");
        }
    }
    // One-bit limits at d=1024: sign sketch pi/2, unbiased sign pi/2 - 1.
    {
        SweepConfig cfg;
        cfg.methods = {MethodTag::Qjl, MethodTag::EdenUnbiased};
        cfg.dims = {1024};
        cfg.bits = {1};
        cfg.master_seed = seed;
        cfg.threads = threads;
        for (const auto& r : run_paired_sweep(cfg)) {
            double ref = analysis::asymptotic_vnmse(r.method);
            report(r.method.name() + " b=1 d=1024", r.mean, ref, 0.05 * ref,
                   "5% rel");
        }
    }
    // Unit-scale ladder stays under its worst-case guarantee.
    {
        SweepConfig cfg;
        cfg.methods = {MethodTag::TurboQuantMse};
        cfg.dims = {128};
        cfg.bits = {1, 2, 3, 4};
        cfg.master_seed = seed;
        cfg.threads = threads;
        for (const auto& r : run_paired_sweep(cfg)) {
            double bound = analysis::turboquant_mse_bound(r.bits);
            bool ok = r.mean <= bound;
            failures += ok ? 0 : 1;
            std::printf("[%s] %-44s value=%.6f bound=%.6f\n",
                        ok ? "PASS" : "FAIL",
                        ("tq-mse b=" + std::to_string(r.bits) + " d=128 under bound")
                            .c_str(),
                        r.mean, bound);
        }
    }
    std::printf("%s\n", failures == 0 ? "calibration: all checks passed"
                                      : "calibration: FAILURES present");
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotation-based vector quantization benchmark"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ROTQUANT_VERSION);

    // codebook
    auto* sub_cb = app.add_subcommand("codebook", "print an optimal scalar codebook as JSON");
    int cb_bits = 1;
    sub_cb->add_option("--bits", cb_bits, "codeword width (1..8)")
        ->required()
        ->check(CLI::Range(1, 8));

    // oracle
    auto* sub_or = app.add_subcommand("oracle", "print an analytic reference value as JSON");
    std::string or_what = "exact-1bit", or_method = "qjl";
    int or_d = 128, or_b = 1;
    double or_t = 0.0;
    sub_or->add_option("--what", or_what,
                       "coord-cdf | exact-1bit | tq-bound | asymptotic | expected-vnmse");
    sub_or->add_option("--d", or_d, "dimension");
    sub_or->add_option("--b", or_b, "bits");
    sub_or->add_option("--t", or_t, "evaluation point for coord-cdf");
    sub_or->add_option("--method", or_method, "method for asymptotic");

    // sweep / hist shared flags
    SweepFlags sf;
    auto add_sweep_flags = [](CLI::App* sub, SweepFlags& f) {
        sub->add_option("--methods", f.methods, "comma list of methods");
        sub->add_option("--bits", f.bits, "comma list of bit widths");
        sub->add_option("--seed", f.seed, "master seed");
        sub->add_option("--pairs", f.pairs, "pairs per cell (-1 = schedule)");
        sub->add_option("--rotation", f.rotation, "auto | haar | rht");
        sub->add_option("--rounds", f.rounds, "fast-transform rounds");
        sub->add_option("--threads", f.threads, "worker threads (0 = hardware)");
        sub->add_option("--mu", f.mu, "lognormal mu");
        sub->add_option("--sigma", f.sigma, "lognormal sigma");
        sub->add_option("--out", f.out, "output directory");
    };
    auto* sub_sw = app.add_subcommand("sweep", "paired-seed error sweep: CSV + SVG per bit width");
    sub_sw->add_option("--dims", sf.dims, "comma list of dimensions");
    sub_sw->add_option("--metric", sf.metric, "vnmse | mse | inner_sq_error");
    add_sweep_flags(sub_sw, sf);

    SweepFlags hf;
    hf.methods = "eden-unbiased,tq-prod";
    hf.out = "out-hist";
    int hist_dim = 128, hist_bins = 40;
    auto* sub_hi = app.add_subcommand("hist", "per-pair inner-product error histograms");
    sub_hi->add_option("--dim", hist_dim, "dimension");
    sub_hi->add_option("--bins", hist_bins, "histogram bins");
    add_sweep_flags(sub_hi, hf);

    // recall
    std::string rc_data = "clustered:1100,128", rc_methods = "eden-unbiased,tq-prod";
    std::string rc_bits = "2,4", rc_rotation = "auto", rc_out = "out-recall";
    int rc_queries = 100, rc_k = 10, rc_clusters = 32, rc_rounds = 2;
    uint64_t rc_seed = 1;
    bool rc_identity = false;
    auto* sub_rc = app.add_subcommand("recall", "asymmetric top-k recall vs exact inner product");
    sub_rc->add_option("--data", rc_data, "lognormal:count,dim | clustered:count,dim | fvecs:path");
    sub_rc->add_option("--queries", rc_queries, "rows reserved as queries (from the end)");
    sub_rc->add_option("--k", rc_k, "recall depth");
    sub_rc->add_option("--methods", rc_methods, "comma list of methods");
    sub_rc->add_option("--bits", rc_bits, "comma list of bit widths");
    sub_rc->add_option("--seed", rc_seed, "master seed");
    sub_rc->add_flag("--identity", rc_identity, "also score an unquantized debug run");
    sub_rc->add_option("--clusters", rc_clusters, "clusters for clustered data");
    sub_rc->add_option("--rotation", rc_rotation, "auto | haar | rht");
    sub_rc->add_option("--rounds", rc_rounds, "fast-transform rounds");
    sub_rc->add_option("--out", rc_out, "output directory");

    // quantize / dequantize
    std::string qz_in, qz_method = "eden-biased", qz_rotation = "auto", qz_out = "vectors.rqv";
    int qz_bits = 4, qz_rounds = 2;
    uint64_t qz_seed = 1;
    auto* sub_qz = app.add_subcommand("quantize", "compress an fvecs file into a payload file");
    sub_qz->add_option("--input", qz_in, "input fvecs path")->required();
    sub_qz->add_option("--method", qz_method, "method name");
    sub_qz->add_option("--bits", qz_bits, "bit width");
    sub_qz->add_option("--seed", qz_seed, "rotation seed");
    sub_qz->add_option("--rotation", qz_rotation, "auto | haar | rht");
    sub_qz->add_option("--rounds", qz_rounds, "fast-transform rounds");
    sub_qz->add_option("--output", qz_out, "output payload path");

    std::string dq_in, dq_out = "vectors.fvecs";
    auto* sub_dq = app.add_subcommand("dequantize", "reconstruct an fvecs file from a payload file");
    sub_dq->add_option("--input", dq_in, "input payload path")->required();
    sub_dq->add_option("--output", dq_out, "output fvecs path");

    // calibrate
    uint64_t cal_seed = 1;
    int cal_threads = 0;
    auto* sub_cal = app.add_subcommand("calibrate", "Monte-Carlo checks against analytic constants");
    sub_cal->add_option("--seed", cal_seed, "master seed");
    sub_cal->add_option("--threads", cal_threads, "worker threads (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (sub_cb->parsed()) return cmd_codebook(cb_bits);
        if (sub_or->parsed()) return cmd_oracle(or_what, or_d, or_b, or_t, or_method);
        if (sub_sw->parsed()) return cmd_sweep(sf);
        if (sub_hi->parsed()) return cmd_hist(hf, hist_dim, hist_bins);
        if (sub_rc->parsed()) {
            return cmd_recall(rc_data, rc_queries, rc_k, rc_methods, rc_bits,
                              rc_seed, rc_identity, rc_clusters, rc_rotation,
                              rc_rounds, rc_out);
        }
        if (sub_qz->parsed()) {
            return cmd_quantize(qz_in, qz_method, qz_bits, qz_seed, qz_rotation,
                                qz_rounds, qz_out);
        }
        if (sub_dq->parsed()) return cmd_dequantize(dq_in, dq_out);
        if (sub_cal->parsed()) return cmd_calibrate(cal_seed, cal_threads);
    } catch (const MalformedPayload& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const DegenerateScale& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const ConvergenceFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return 0;
}
