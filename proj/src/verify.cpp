#include "sigood/verify.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sigood/autodiff.hpp"
#include "sigood/energy.hpp"
#include "sigood/epo.hpp"
#include "sigood/gnn.hpp"
#include "sigood/matrix.hpp"
#include "sigood/prompt.hpp"
#include "sigood/rng.hpp"

namespace sigood {

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    }
    return m;
}

// All prompt-generator parameters random and nonzero so every gradient path
// (including the output projection the identity init zeroes) is exercised.
PromptGenParams random_prompt_gen(Rng& rng, std::size_t h) {
    PromptGenParams p;
    p.depth = 3;
    p.w1 = random_matrix(rng, h, h, -0.5, 0.5);
    p.b1 = random_matrix(rng, 1, h, -0.2, 0.2);
    p.w2 = random_matrix(rng, h, h, -0.5, 0.5);
    p.b2 = random_matrix(rng, 1, h, -0.2, 0.2);
    p.w3 = random_matrix(rng, h, h, -0.5, 0.5);
    p.b3 = random_matrix(rng, 1, h, -0.2, 0.2);
    p.gamma = random_matrix(rng, 1, h, 0.5, 1.5);
    p.lambda = random_matrix(rng, 1, h, -0.2, 0.2);
    return p;
}

ad::DiffValue positive_energy_chain(ad::DiffValue embeddings, ad::DiffValue w, ad::DiffValue b,
                                    double eps_pos) {
    ad::DiffValue logits = ad::linear(embeddings, w, b);
    return ad::add_scalar(ad::softplus(ad::neg(ad::row_logsumexp(logits))), eps_pos);
}

// Scalarizes an [n x c] output through a fixed random linear functional; a
// plain sum could let sign-opposed per-entry errors cancel.
ad::DiffValue weigh(const Matrix& row_weights, ad::DiffValue x, ad::Tape& tape,
                    const Matrix& col_weights) {
    ad::DiffValue rows = ad::left_matmul_const(row_weights, x);  // [1 x c]
    return ad::matmul(rows, tape.leaf(col_weights, "scalarize"));
}

GradCheckCase run_case(const std::string& name, const ad::BuildFn& build,
                       const std::vector<Matrix>& leaves, double step, double tol) {
    const ad::GradCheckResult res = ad::grad_check(build, leaves, step);
    return {name, res.max_rel_err, res.ok(tol)};
}

}  // namespace

std::vector<GradCheckCase> run_grad_check_suite(std::uint64_t seed, std::size_t instances,
                                                double step, double tol) {
    std::vector<GradCheckCase> cases;
    const double eps_pos = 1e-6;
    for (std::size_t inst = 0; inst < instances; ++inst) {
        Rng rng(derive_seed(seed, "gradcheck-" + std::to_string(inst)));
        const std::size_t n = 3 + inst % 3;
        const std::size_t h = 4;
        const std::string tag = "#" + std::to_string(inst);

        const PromptGenParams params = random_prompt_gen(rng, h);
        const Matrix emb = random_matrix(rng, n, h, -1.0, 1.0);
        const Matrix row_w = random_matrix(rng, 1, n, -1.0, 1.0);
        const Matrix col_w = random_matrix(rng, h, 1, -1.0, 1.0);

        {
            std::vector<Matrix> leaves{emb,      params.w1, params.b1,    params.w2,
                                       params.b2, params.w3, params.b3,   params.gamma,
                                       params.lambda};
            auto build = [&](ad::Tape& tape, const std::vector<ad::DiffValue>& l) {
                PromptLeaves pl{l[1], l[2], l[3], l[4], l[5], l[6], l[7], l[8]};
                ad::DiffValue prompt = generate_prompt_diff(tape, l[0], pl, params);
                return weigh(row_w, prompt, tape, col_w);
            };
            cases.push_back(run_case("prompt-generator" + tag, build, leaves, step, tol));
        }
        {
            const Matrix x = random_matrix(rng, n, h, -1.0, 1.0);
            std::vector<Matrix> leaves{x, params.gamma, params.lambda};
            auto build = [&](ad::Tape& tape, const std::vector<ad::DiffValue>& l) {
                ad::DiffValue normed = ad::layer_norm(l[0], l[1], l[2], params.epsilon_ln);
                return weigh(row_w, normed, tape, col_w);
            };
            cases.push_back(run_case("layer-norm" + tag, build, leaves, step, tol));
        }

        const Matrix head_w = random_matrix(rng, h, 2, -0.5, 0.5);
        const Matrix head_b = random_matrix(rng, 1, 2, -0.5, 0.5);
        const Matrix energy_row_w = random_matrix(rng, 1, n, -1.0, 1.0);
        {
            std::vector<Matrix> leaves{emb, head_w, head_b};
            auto build = [&](ad::Tape&, const std::vector<ad::DiffValue>& l) {
                ad::DiffValue pos = positive_energy_chain(l[0], l[1], l[2], eps_pos);
                return ad::left_matmul_const(energy_row_w, pos);  // [1 x 1]
            };
            cases.push_back(run_case("energy-chain" + tag, build, leaves, step, tol));
        }
        {
            // Reference energies and the node partition are fixed at the base
            // point; the loss stays smooth under the probe steps.
            ScoringHead head{head_w, head_b};
            const Matrix injected = emb + generate_prompt(emb, params);
            const Matrix pos_p = positive_energies(injected, head, eps_pos);
            const Matrix pos_t = positive_energies(emb, head, eps_pos);
            std::vector<double> delta(n);
            for (std::size_t i = 0; i < n; ++i) delta[i] = std::log(pos_p(i, 0) / pos_t(i, 0));
            const Partition part = partition_nodes(delta);
            EpoConfig cfg;
            cfg.beta = 5.0;
            std::vector<Matrix> leaves{emb,      params.w1, params.b1,    params.w2,
                                       params.b2, params.w3, params.b3,   params.gamma,
                                       params.lambda, head_w, head_b};
            auto build = [&, part, cfg](ad::Tape& tape, const std::vector<ad::DiffValue>& l) {
                PromptLeaves pl{l[1], l[2], l[3], l[4], l[5], l[6], l[7], l[8]};
                ad::DiffValue prompt = generate_prompt_diff(tape, l[0], pl, params);
                ad::DiffValue pos = positive_energy_chain(ad::add(prompt, l[0]), l[9], l[10],
                                                          cfg.eps_pos);
                return epo_loss(pos, pos_t, part, cfg);
            };
            cases.push_back(run_case("epo-pipeline" + tag, build, leaves, step, tol));
        }
    }
    return cases;
}

std::vector<DerivationCase> run_derivation_suite(std::uint64_t seed, std::size_t instances,
                                                 std::size_t grid_resolution) {
    std::vector<DerivationCase> cases;
    auto from_report = [](const std::string& name, const DerivationReport& rep) {
        DerivationCase c;
        c.name = name;
        c.max_gap = rep.max_gap;
        c.gap_bound = 2.0 * rep.grid_step;
        c.max_reward_residual = rep.max_reward_residual;
        c.residual_tol = rep.reward_residual_tol;
        c.ok = rep.ok();
        return c;
    };

    {
        // beta = 1, r = (log 3, 0) on the uniform prior: maximizer (0.75, 0.25).
        const DerivationReport rep = verify_reward_derivation(
            {0.5, 0.5}, {std::log(3.0), 0.0}, 1.0, grid_resolution);
        DerivationCase c = from_report("k2-closed-form", rep);
        c.ok = c.ok && std::fabs(rep.q_grid[0] - 0.75) <= c.gap_bound &&
               std::fabs(rep.q_grid[1] - 0.25) <= c.gap_bound;
        cases.push_back(c);
    }
    {
        Rng rng(derive_seed(seed, "derivation-zero-reward"));
        std::vector<double> p{rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0),
                              rng.uniform(0.2, 1.0)};
        const double total = p[0] + p[1] + p[2];
        for (double& v : p) v /= total;
        const DerivationReport rep =
            verify_reward_derivation(p, {0.0, 0.0, 0.0}, 1.0, grid_resolution);
        cases.push_back(from_report("zero-reward", rep));
    }
    for (std::size_t inst = 0; inst < instances; ++inst) {
        Rng rng(derive_seed(seed, "derivation-" + std::to_string(inst)));
        const std::size_t k = 2 + inst % 2;
        std::vector<double> p(k), r(k);
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            p[i] = rng.uniform(0.2, 1.0);
            total += p[i];
        }
        for (double& v : p) v /= total;
        for (std::size_t i = 0; i < k; ++i) r[i] = rng.uniform(-1.0, 1.0);
        const double beta = rng.uniform(0.5, 3.0);
        const DerivationReport rep = verify_reward_derivation(p, r, beta, grid_resolution);
        cases.push_back(from_report(
            "random-k" + std::to_string(k) + "-" + std::to_string(inst), rep));
    }
    return cases;
}

}  // namespace sigood
