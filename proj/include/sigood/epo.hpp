#pragma once

#include <cstddef>
#include <vector>

#include "sigood/autodiff.hpp"
#include "sigood/energy.hpp"
#include "sigood/matrix.hpp"

namespace sigood {

struct EpoConfig {
    double beta = 80.0;      // preference sharpness
    double clamp_arg = 50.0; // bound on the sigmoid argument
    double eps_pos = kDefaultEpsPos;
};

// r = beta * log(e_p / e_t); both energies strictly positive.
double reward(double e_p, double e_t, double beta);

// P(a beats b) = sigmoid(r_a - r_b), evaluated in the stable branch form.
double bt_probability(double r_ood, double r_id);

// L = -log sigmoid(beta*log(mean ratio over ood) - beta*log(mean ratio over
// id)), argument clamped to [-clamp_arg, clamp_arg]. pos_energy_p is on the
// tape ([n x 1]); pos_energy_t is the detached reference. Both partition
// sides must be nonempty (the partition fallback guarantees this).
ad::DiffValue epo_loss(ad::DiffValue pos_energy_p, const Matrix& pos_energy_t,
                       const Partition& partition, const EpoConfig& config);

// Plain-value loss for post-step diagnostics; same formula, no tape.
double epo_loss_value(const std::vector<double>& pos_energy_p,
                      const std::vector<double>& pos_energy_t, const Partition& partition,
                      const EpoConfig& config);

struct DerivationReport {
    std::vector<double> q_grid;     // grid-search maximizer
    std::vector<double> q_gibbs;    // closed form p * exp(r/beta) / Z
    double max_gap = 0.0;           // max |q_grid - q_gibbs|
    double grid_step = 0.0;
    double max_reward_residual = 0.0;  // max |r_i - beta*log(q_grid_i/p_i) - beta*log Z|
    double reward_residual_tol = 0.0;
    bool ok() const { return max_gap < 2.0 * grid_step && max_reward_residual <= reward_residual_tol; }
};

// Maximizes J(q) = sum q_i r_i - beta * KL(q || p) over the probability
// simplex by grid search and compares against the closed-form maximizer.
// k = |p| must be 2..4; grid_resolution points per simplex dimension.
DerivationReport verify_reward_derivation(const std::vector<double>& p,
                                          const std::vector<double>& r, double beta,
                                          std::size_t grid_resolution = 400);

}  // namespace sigood
