#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigood/dataio.hpp"
#include "sigood/detector.hpp"
#include "sigood/gnn.hpp"

namespace sigood {

// Rank-based (Mann-Whitney) AUC with half credit for ties: the probability
// that a random positive outscores a random negative.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct DataSourceSpec {
    enum class Kind { synth, tu };
    Kind kind = Kind::synth;
    SynthSpec synth;
    std::string tu_directory;
    std::string tu_name;
};

struct BenchmarkConfig {
    std::string name;
    enum class Protocol { ood_pair, anomaly };
    Protocol protocol = Protocol::ood_pair;
    // ood_pair protocol: pretrain on id_train, mix id_test with ood 1:1.
    DataSourceSpec id_train, id_test, ood;
    // anomaly protocol: minority class of the source becomes the OOD side.
    DataSourceSpec anomaly_source;
    std::vector<std::string> methods;  // sigood | no-epo | no-pg (alias raw-energy)
    std::vector<std::uint64_t> seeds;
    PretrainConfig pretrain;
    DetectorConfig detector;
    std::string sweep_param;  // "" | "beta" | "iterations"
    std::vector<double> sweep_values;
    bool measure_runtime = false;  // false writes 0 so reruns are byte-identical
};

struct BenchmarkRow {
    std::string dataset;
    std::string method;  // annotated with the sweep value when sweeping
    std::uint64_t seed = 0;
    double auc = 0.0;
    double runtime_s = 0.0;
};

struct AggregateRow {
    std::string dataset;
    std::string method;
    double mean_auc = 0.0;
    double std_auc = 0.0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
    std::vector<AggregateRow> aggregates;
};

// Per seed: materialize datasets, pretrain, build the labeled test set, run
// every method, score by AUC. Sweeps reuse the per-seed model and emit rows
// grouped by sweep value in the order given.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

struct ScoreDistributionRow {
    std::size_t graph_id = 0;
    double score = 0.0;
    std::optional<int> label;
};

// Optionally min-max normalizes scores to [0,1]; a constant batch maps to
// 0.5 everywhere.
std::vector<ScoreDistributionRow> export_score_distribution(
    const std::vector<DetectionResult>& results, bool normalize);

}  // namespace sigood
