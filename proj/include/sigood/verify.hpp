#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sigood {

// Self-check suites behind the `verify` subcommand: analytic gradients vs
// central finite differences, and the grid-search witness that the Gibbs
// closed form maximizes the reward-minus-KL objective.

struct GradCheckCase {
    std::string name;
    double max_rel_err = 0.0;
    bool ok = false;
};

// Four chains per instance: the prompt generator forward, layer norm alone,
// the embeddings -> logits -> positive-energy chain, and the full
// prompt -> injection -> energy -> preference loss pipeline.
std::vector<GradCheckCase> run_grad_check_suite(std::uint64_t seed, std::size_t instances,
                                                double step, double tol);

struct DerivationCase {
    std::string name;
    double max_gap = 0.0;
    double gap_bound = 0.0;
    double max_reward_residual = 0.0;
    double residual_tol = 0.0;
    bool ok = false;
};

// Random (p, r, beta) instances with k in {2,3}, plus the fixed k=2 case
// whose maximizer is (0.75, 0.25) in closed form.
std::vector<DerivationCase> run_derivation_suite(std::uint64_t seed, std::size_t instances,
                                                 std::size_t grid_resolution);

}  // namespace sigood
