#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigood/dataio.hpp"
#include "sigood/energy.hpp"
#include "sigood/epo.hpp"
#include "sigood/gnn.hpp"
#include "sigood/prompt.hpp"

namespace sigood {

enum class DetectorMode { transductive, per_graph };
enum class Ablation { full, no_epo, no_pg };

std::string to_string(DetectorMode m);
std::string to_string(Ablation a);
DetectorMode detector_mode_from_string(const std::string& s);
Ablation ablation_from_string(const std::string& s);

struct DetectorConfig {
    double beta = 80.0;
    std::size_t iterations = 500;  // desk-scale default
    double lr = 1e-3;
    DetectorMode mode = DetectorMode::transductive;
    int pg_depth = 3;
    double tau = 0.0;
    std::uint64_t seed = 0;
    Ablation ablation = Ablation::full;
    bool flip_score = false;  // diagnostic: negate scores before thresholding
    double clamp_arg = 50.0;
    double eps_pos = kDefaultEpsPos;
    double epsilon_ln = 1e-5;
};

struct IterationRecord {
    double loss = 0.0;       // objective before the gradient step
    std::size_t n_ood = 0;
    std::size_t n_id = 0;
    bool fallback = false;
    double post_loss = 0.0;  // objective re-evaluated after the step, same reference
};

struct DetectionResult {
    std::size_t graph_id = 0;
    double score = 0.0;
    bool is_ood = false;
    std::optional<int> label;  // dist_label when the dataset carries one
    std::vector<IterationRecord> trace;
};

// Runs the iterative loop on every test graph and scores them. The frozen
// model is never modified; the score is the negated objective of the final
// iteration (higher = more OOD). no-epo swaps the objective for the negated
// mean positive energy (so its score is that mean); no-pg skips the loop and
// scores the unprompted mean positive energy.
std::vector<DetectionResult> detect(const Dataset& test, const FrozenModel& model,
                                    const DetectorConfig& config);

inline bool threshold_decide(double score, double tau) { return score >= tau; }

// (1 - target_fpr) quantile of held-out ID scores, linearly interpolated
// between order statistics.
double calibrate_tau(std::vector<double> id_scores, double target_fpr);

}  // namespace sigood
