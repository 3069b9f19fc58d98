#include "sigood/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "sigood/rng.hpp"

namespace sigood {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("auc: scores and labels differ in length");
    }
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels) {
        if (l == 1) {
            ++n_pos;
        } else if (l == 0) {
            ++n_neg;
        } else {
            throw std::invalid_argument("auc: labels must be 0 or 1");
        }
    }
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("auc: needs at least one positive and one negative");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });
    // Tie groups share the average of the 1-based ranks they span.
    double rank_sum_pos = 0.0;
    std::size_t lo = 0;
    while (lo < order.size()) {
        std::size_t hi = lo;
        while (hi + 1 < order.size() && scores[order[hi + 1]] == scores[order[lo]]) {
            ++hi;
        }
        const double avg_rank = 0.5 * static_cast<double>(lo + hi) + 1.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            if (labels[order[i]] == 1) rank_sum_pos += avg_rank;
        }
        lo = hi + 1;
    }
    const double m = static_cast<double>(n_pos);
    return (rank_sum_pos - m * (m + 1.0) / 2.0) / (m * static_cast<double>(n_neg));
}

namespace {

Dataset load_source(const DataSourceSpec& src, std::uint64_t bench_seed, const char* tag) {
    if (src.kind == DataSourceSpec::Kind::tu) {
        return parse_tu_dataset(src.tu_directory, src.tu_name);
    }
    SynthSpec spec = src.synth;
    spec.seed = derive_seed(bench_seed ^ spec.seed, tag);
    return synth_dataset(spec);
}

Ablation method_ablation(const std::string& method) {
    if (method == "sigood" || method == "full") return Ablation::full;
    return ablation_from_string(method);
}

std::string format_sweep_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void apply_sweep(DetectorConfig& cfg, const std::string& param, double value) {
    if (param == "beta") {
        cfg.beta = value;
    } else if (param == "iterations") {
        const auto it = static_cast<long long>(std::llround(value));
        if (it < 1) throw std::invalid_argument("run_benchmark: swept iterations must be >= 1");
        cfg.iterations = static_cast<std::size_t>(it);
    } else {
        throw std::invalid_argument("run_benchmark: unknown sweep_param '" + param + "'");
    }
}

struct SeedMaterial {
    FrozenModel model;
    Dataset test;
};

SeedMaterial prepare_seed(const BenchmarkConfig& config, std::uint64_t seed) {
    SeedMaterial out;
    PretrainConfig pc = config.pretrain;
    pc.seed = derive_seed(seed, "pretrain");
    if (config.protocol == BenchmarkConfig::Protocol::ood_pair) {
        Dataset id_train = load_source(config.id_train, seed, "id-train");
        Dataset id_test = load_source(config.id_test, seed, "id-test");
        Dataset ood = load_source(config.ood, seed, "ood");
        out.model = pretrain(id_train, pc);
        out.test = mix_test_set(id_test, ood, derive_seed(seed, "mix"));
    } else {
        Dataset source = load_source(config.anomaly_source, seed, "source");
        auto split = anomaly_split(source, derive_seed(seed, "split"));
        out.model = pretrain(split.first, pc);
        out.test = std::move(split.second);
    }
    return out;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    if (config.name.empty()) throw std::invalid_argument("run_benchmark: empty benchmark name");
    if (config.methods.empty()) throw std::invalid_argument("run_benchmark: no methods");
    if (config.seeds.empty()) throw std::invalid_argument("run_benchmark: no seeds");
    if (!config.sweep_param.empty() && config.sweep_values.empty()) {
        throw std::invalid_argument("run_benchmark: sweep_param set but sweep_values empty");
    }
    for (const auto& m : config.methods) method_ablation(m);  // reject unknown names early

    const std::size_t n_sweeps = config.sweep_param.empty() ? 1 : config.sweep_values.size();
    // rows bucketed by sweep value so reuse of the per-seed model does not
    // disturb the sweep-major row order of the report
    std::vector<std::vector<BenchmarkRow>> buckets(n_sweeps);

    for (std::uint64_t seed : config.seeds) {
        SeedMaterial mat = prepare_seed(config, seed);
        std::vector<int> labels;
        labels.reserve(mat.test.size());
        for (const auto& lg : mat.test.graphs) {
            if (!lg.dist_label) {
                throw std::runtime_error("run_benchmark: test graph lacks a distribution label");
            }
            labels.push_back(*lg.dist_label);
        }
        for (std::size_t si = 0; si < n_sweeps; ++si) {
            for (const auto& method : config.methods) {
                DetectorConfig dc = config.detector;
                dc.seed = derive_seed(seed, "detector");
                dc.ablation = method_ablation(method);
                std::string annotated = method;
                if (!config.sweep_param.empty()) {
                    apply_sweep(dc, config.sweep_param, config.sweep_values[si]);
                    annotated += "[" + config.sweep_param + "=" +
                                 format_sweep_value(config.sweep_values[si]) + "]";
                }
                const auto t0 = std::chrono::steady_clock::now();
                std::vector<DetectionResult> results = detect(mat.test, mat.model, dc);
                const auto t1 = std::chrono::steady_clock::now();
                std::vector<double> scores;
                scores.reserve(results.size());
                for (const auto& r : results) scores.push_back(r.score);
                BenchmarkRow row;
                row.dataset = config.name;
                row.method = annotated;
                row.seed = seed;
                row.auc = auc(scores, labels);
                row.runtime_s = config.measure_runtime
                                    ? std::chrono::duration<double>(t1 - t0).count()
                                    : 0.0;
                buckets[si].push_back(std::move(row));
            }
        }
    }

    BenchmarkReport report;
    for (auto& bucket : buckets) {
        for (auto& row : bucket) report.rows.push_back(std::move(row));
    }

    // aggregate over seeds, keyed by (dataset, method) in first-appearance order
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& row : report.rows) {
        std::pair<std::string, std::string> key{row.dataset, row.method};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (const auto& key : keys) {
        std::vector<double> vals;
        for (const auto& row : report.rows) {
            if (row.dataset == key.first && row.method == key.second) vals.push_back(row.auc);
        }
        const double n = static_cast<double>(vals.size());
        const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= n;
        report.aggregates.push_back({key.first, key.second, mean, std::sqrt(var)});
    }
    return report;
}

std::vector<ScoreDistributionRow> export_score_distribution(
    const std::vector<DetectionResult>& results, bool normalize) {
    std::vector<ScoreDistributionRow> rows;
    rows.reserve(results.size());
    double lo = 0.0, hi = 0.0;
    if (normalize && !results.empty()) {
        lo = hi = results.front().score;
        for (const auto& r : results) {
            lo = std::min(lo, r.score);
            hi = std::max(hi, r.score);
        }
    }
    for (const auto& r : results) {
        ScoreDistributionRow row;
        row.graph_id = r.graph_id;
        row.label = r.label;
        if (normalize) {
            row.score = (hi > lo) ? (r.score - lo) / (hi - lo) : 0.5;
        } else {
            row.score = r.score;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sigood
