#include "sigood/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sigood/autodiff.hpp"
#include "sigood/rng.hpp"

namespace sigood {

std::string to_string(DetectorMode m) {
    return m == DetectorMode::transductive ? "transductive" : "per-graph";
}

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::full: return "full";
        case Ablation::no_epo: return "no-epo";
        case Ablation::no_pg: return "no-pg";
    }
    return "?";
}

DetectorMode detector_mode_from_string(const std::string& s) {
    if (s == "transductive") return DetectorMode::transductive;
    if (s == "per-graph") return DetectorMode::per_graph;
    throw std::invalid_argument("unknown detector mode '" + s + "'");
}

Ablation ablation_from_string(const std::string& s) {
    if (s == "full") return Ablation::full;
    if (s == "no-epo") return Ablation::no_epo;
    if (s == "no-pg" || s == "raw-energy") return Ablation::no_pg;
    throw std::invalid_argument("unknown ablation '" + s + "'");
}

namespace {

struct GraphState {
    Matrix emb;    // current reference embeddings
    Matrix pos_t;  // [n x 1] positive energies of emb
};

// Tape chain logits -> positive energy.
ad::DiffValue positive_energy_chain(ad::DiffValue logits, double eps_pos) {
    return ad::add_scalar(ad::softplus(ad::neg(ad::row_logsumexp(logits))), eps_pos);
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

double mean_of(const Matrix& column) {
    double acc = 0.0;
    for (std::size_t i = 0; i < column.rows(); ++i) acc += column(i, 0);
    return acc / static_cast<double>(column.rows());
}

// Runs the iterative loop over `states` with one shared prompt generator,
// appending one record per iteration to each graph's trace.
void run_loop(std::vector<GraphState>& states, std::vector<std::vector<IterationRecord>>& traces,
              PromptGenParams& pg, const FrozenModel& model, const DetectorConfig& config) {
    EpoConfig epo_cfg{config.beta, config.clamp_arg, config.eps_pos};
    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        ad::Tape tape;
        PromptLeaves leaves = leaf_prompt_gen(tape, pg);
        ad::DiffValue head_w = tape.leaf(model.head.w, "head_w");
        ad::DiffValue head_b = tape.leaf(model.head.b, "head_b");

        ad::DiffValue batch_loss;
        bool have_loss = false;
        for (std::size_t g = 0; g < states.size(); ++g) {
            GraphState& state = states[g];
            ad::DiffValue emb = tape.leaf(state.emb, "emb");
            ad::DiffValue prompt = generate_prompt_diff(tape, emb, leaves, pg);
            ad::DiffValue prompted = ad::add_const(prompt, state.emb);
            ad::DiffValue epos =
                positive_energy_chain(ad::linear(prompted, head_w, head_b), config.eps_pos);

            const Matrix& pos_p = epos.value();
            std::vector<double> delta(pos_p.rows());
            for (std::size_t i = 0; i < pos_p.rows(); ++i)
                delta[i] = energy_variation(pos_p(i, 0), state.pos_t(i, 0));
            Partition part = partition_nodes(delta);

            ad::DiffValue loss;
            if (config.ablation == Ablation::no_epo)
                loss = ad::neg(ad::reduce_mean_subset(epos, all_rows(pos_p.rows())));
            else
                loss = epo_loss(epos, state.pos_t, part, epo_cfg);

            IterationRecord rec;
            rec.loss = loss.value()(0, 0);
            rec.n_ood = part.ood.size();
            rec.n_id = part.id.size();
            rec.fallback = part.fallback_used;
            if (!std::isfinite(rec.loss))
                throw std::runtime_error("detect: loss is not finite at iteration " +
                                         std::to_string(iter) + " (graph " + std::to_string(g) +
                                         ")");
            traces[g].push_back(rec);

            batch_loss = have_loss ? ad::add(batch_loss, loss) : loss;
            have_loss = true;
        }

        tape.backward(batch_loss);
        apply_prompt_gradients(pg, leaves, config.lr);

        // Advance: the prompted graph under the updated generator becomes
        // the next reference. Its objective against the just-used reference
        // is recorded for descent diagnostics.
        for (std::size_t g = 0; g < states.size(); ++g) {
            GraphState& state = states[g];
            Matrix prompted = state.emb;
            prompted += generate_prompt(state.emb, pg);
            Matrix pos_new = positive_energies(prompted, model.head, config.eps_pos);

            std::vector<double> delta(pos_new.rows());
            std::vector<double> pos_new_v(pos_new.rows()), pos_old_v(pos_new.rows());
            for (std::size_t i = 0; i < pos_new.rows(); ++i) {
                delta[i] = energy_variation(pos_new(i, 0), state.pos_t(i, 0));
                pos_new_v[i] = pos_new(i, 0);
                pos_old_v[i] = state.pos_t(i, 0);
            }
            Partition part = partition_nodes(delta);
            if (config.ablation == Ablation::no_epo)
                traces[g][iter].post_loss = -mean_of(pos_new);
            else
                traces[g][iter].post_loss = epo_loss_value(pos_new_v, pos_old_v, part, epo_cfg);

            state.emb = std::move(prompted);
            state.pos_t = std::move(pos_new);
        }
    }
}

}  // namespace

std::vector<DetectionResult> detect(const Dataset& test, const FrozenModel& model,
                                    const DetectorConfig& config) {
    if (test.empty()) throw std::invalid_argument("detect: empty test set");
    if (test.feature_dim != model.encoder.input_dim)
        throw std::invalid_argument("detect: dataset feature dim " +
                                    std::to_string(test.feature_dim) + " != model input dim " +
                                    std::to_string(model.encoder.input_dim));
    if (config.iterations == 0) throw std::invalid_argument("detect: iterations must be >= 1");
    if (!(config.lr >= 0.0)) throw std::invalid_argument("detect: lr must be >= 0");
    for (std::size_t g = 0; g < test.size(); ++g) {
        if (test.graphs[g].graph.node_count < 2)
            throw std::invalid_argument(
                "detect: graph " + std::to_string(g) +
                " has fewer than 2 nodes; the node partition needs both sides");
    }

    std::vector<GraphState> states;
    states.reserve(test.size());
    for (const auto& lg : test.graphs) {
        GraphState s;
        s.emb = encode(lg.graph, model.encoder).embeddings;
        s.pos_t = positive_energies(s.emb, model.head, config.eps_pos);
        states.push_back(std::move(s));
    }

    std::vector<DetectionResult> results(test.size());
    for (std::size_t g = 0; g < test.size(); ++g) {
        results[g].graph_id = g;
        results[g].label = test.graphs[g].dist_label;
    }

    if (config.ablation == Ablation::no_pg) {
        for (std::size_t g = 0; g < test.size(); ++g) {
            double score = mean_of(states[g].pos_t);
            if (config.flip_score) score = -score;
            results[g].score = score;
            results[g].is_ood = threshold_decide(score, config.tau);
        }
        return results;
    }

    std::vector<std::vector<IterationRecord>> traces(test.size());
    const std::uint64_t pg_seed = derive_seed(config.seed, "prompt-gen");
    const std::size_t h = model.encoder.hidden_dim;

    if (config.mode == DetectorMode::transductive) {
        PromptGenParams pg = init_prompt_gen(h, config.pg_depth, pg_seed);
        pg.epsilon_ln = config.epsilon_ln;
        run_loop(states, traces, pg, model, config);
    } else {
        // Identical seeded init per graph keeps every graph's run
        // independent of the rest of the test set.
        for (std::size_t g = 0; g < test.size(); ++g) {
            PromptGenParams pg = init_prompt_gen(h, config.pg_depth, pg_seed);
            pg.epsilon_ln = config.epsilon_ln;
            std::vector<GraphState> single{std::move(states[g])};
            std::vector<std::vector<IterationRecord>> single_trace(1);
            run_loop(single, single_trace, pg, model, config);
            states[g] = std::move(single[0]);
            traces[g] = std::move(single_trace[0]);
        }
    }

    for (std::size_t g = 0; g < test.size(); ++g) {
        double score = -traces[g].back().loss;
        if (config.flip_score) score = -score;
        results[g].score = score;
        results[g].is_ood = threshold_decide(score, config.tau);
        results[g].trace = std::move(traces[g]);
    }
    return results;
}

double calibrate_tau(std::vector<double> id_scores, double target_fpr) {
    if (id_scores.empty()) throw std::invalid_argument("calibrate_tau: empty scores");
    if (!(target_fpr > 0.0 && target_fpr < 1.0))
        throw std::invalid_argument("calibrate_tau: target_fpr must lie in (0,1)");
    std::sort(id_scores.begin(), id_scores.end());
    const std::size_t n = id_scores.size();
    if (n == 1) return id_scores[0];
    const double pos = (1.0 - target_fpr) * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return id_scores[n - 1];
    return id_scores[lo] + frac * (id_scores[lo + 1] - id_scores[lo]);
}

}  // namespace sigood
