#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigood/detector.hpp"
#include "sigood/eval.hpp"

namespace sigood {

// Columns: graph_id,score,decision,label. The label column appears only when
// every result carries one. An optional seed is recorded as a leading comment.
void write_scores_csv(const std::vector<DetectionResult>& results, const std::string& path,
                      std::optional<std::uint64_t> seed = std::nullopt);

// Columns: graph_id,iteration,loss,n_ood,n_id,fallback. Iterations are 1-based.
void write_trace_csv(const std::vector<DetectionResult>& results, const std::string& path);

// Columns: dataset,method,seed,auc,runtime_s. Reference numbers from the
// published evaluation ride along as comments so desk-scale output is never
// mistaken for them.
void write_report_csv(const BenchmarkReport& report, const std::string& path);

// Columns: dataset,method,mean_auc,std_auc.
void write_aggregate_csv(const BenchmarkReport& report, const std::string& path);

// Columns: graph_id,score,label (label blank when unknown).
void write_distribution_csv(const std::vector<ScoreDistributionRow>& rows,
                            const std::string& path);

struct ScoredRow {
    std::size_t graph_id = 0;
    double score = 0.0;
    std::optional<int> label;
};

// Reads a scores CSV back (comments and the header are skipped). Only the
// graph_id, score and label columns are recovered.
std::vector<ScoredRow> read_scores_csv(const std::string& path);

}  // namespace sigood
