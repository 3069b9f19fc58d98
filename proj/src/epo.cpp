#include "sigood/epo.hpp"

#include <cmath>
#include <stdexcept>

#include "sigood/numerics.hpp"

namespace sigood {

double reward(double e_p, double e_t, double beta) {
    if (!(e_p > 0.0) || !(e_t > 0.0))
        throw std::domain_error("reward: energies must be strictly positive");
    return beta * std::log(e_p / e_t);
}

double bt_probability(double r_ood, double r_id) { return sigmoid(r_ood - r_id); }

namespace {

void check_partition(const Partition& partition, std::size_t n) {
    if (partition.ood.empty() || partition.id.empty())
        throw std::invalid_argument("epo_loss: partition has an empty side (fallback not applied?)");
    if (partition.ood.size() + partition.id.size() != n)
        throw std::invalid_argument("epo_loss: partition does not cover all nodes");
}

}  // namespace

ad::DiffValue epo_loss(ad::DiffValue pos_energy_p, const Matrix& pos_energy_t,
                       const Partition& partition, const EpoConfig& config) {
    const std::size_t n = pos_energy_p.rows();
    if (pos_energy_p.cols() != 1 || pos_energy_t.rows() != n || pos_energy_t.cols() != 1)
        throw std::invalid_argument("epo_loss: energies must be matching column vectors");
    check_partition(partition, n);
    ad::DiffValue ratio = ad::div_by_const(pos_energy_p, pos_energy_t);
    ad::DiffValue mean_ood = ad::reduce_mean_subset(ratio, partition.ood);
    ad::DiffValue mean_id = ad::reduce_mean_subset(ratio, partition.id);
    ad::DiffValue z =
        ad::mul_scalar(ad::sub(ad::log(mean_ood), ad::log(mean_id)), config.beta);
    ad::DiffValue zc = ad::clamp(z, -config.clamp_arg, config.clamp_arg);
    return ad::softplus(ad::neg(zc));
}

double epo_loss_value(const std::vector<double>& pos_energy_p,
                      const std::vector<double>& pos_energy_t, const Partition& partition,
                      const EpoConfig& config) {
    const std::size_t n = pos_energy_p.size();
    if (pos_energy_t.size() != n)
        throw std::invalid_argument("epo_loss_value: size mismatch");
    check_partition(partition, n);
    double mean_ood = 0.0, mean_id = 0.0;
    for (std::size_t i : partition.ood) mean_ood += pos_energy_p[i] / pos_energy_t[i];
    for (std::size_t i : partition.id) mean_id += pos_energy_p[i] / pos_energy_t[i];
    mean_ood /= static_cast<double>(partition.ood.size());
    mean_id /= static_cast<double>(partition.id.size());
    double z = config.beta * (std::log(mean_ood) - std::log(mean_id));
    z = std::min(std::max(z, -config.clamp_arg), config.clamp_arg);
    return softplus(-z);
}

DerivationReport verify_reward_derivation(const std::vector<double>& p,
                                          const std::vector<double>& r, double beta,
                                          std::size_t grid_resolution) {
    const std::size_t k = p.size();
    if (k < 2 || k > 4)
        throw std::invalid_argument("verify_reward_derivation: need 2 <= k <= 4");
    if (r.size() != k) throw std::invalid_argument("verify_reward_derivation: |r| != |p|");
    if (!(beta > 0.0)) throw std::invalid_argument("verify_reward_derivation: beta must be positive");
    if (grid_resolution < 2)
        throw std::invalid_argument("verify_reward_derivation: grid too coarse");
    double sum = 0.0;
    for (double v : p) {
        if (!(v > 0.0))
            throw std::invalid_argument("verify_reward_derivation: p entries must be positive");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("verify_reward_derivation: p is off the simplex");

    auto objective = [&](const std::vector<double>& q) {
        double j = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            j += q[i] * r[i];
            if (q[i] > 0.0) j -= beta * q[i] * std::log(q[i] / p[i]);
        }
        return j;
    };

    const double step = 1.0 / static_cast<double>(grid_resolution);
    std::vector<double> q(k), best_q(k);
    double best = -1e300;
    // Enumerate lattice points of the simplex: the first k-1 coordinates in
    // units of `step`, the last one the remainder.
    std::vector<std::size_t> idx(k - 1, 0);
    for (;;) {
        std::size_t used = 0;
        for (std::size_t i = 0; i < k - 1; ++i) used += idx[i];
        if (used <= grid_resolution) {
            for (std::size_t i = 0; i < k - 1; ++i) q[i] = static_cast<double>(idx[i]) * step;
            q[k - 1] = static_cast<double>(grid_resolution - used) * step;
            double j = objective(q);
            if (j > best) {
                best = j;
                best_q = q;
            }
        }
        // Odometer increment with the simplex bound.
        std::size_t pos = 0;
        for (;;) {
            if (pos == k - 1) break;
            ++idx[pos];
            std::size_t total = 0;
            for (std::size_t i = 0; i < k - 1; ++i) total += idx[i];
            if (total <= grid_resolution) break;
            idx[pos] = 0;
            ++pos;
        }
        if (pos == k - 1) break;
    }

    DerivationReport report;
    report.grid_step = step;
    report.q_grid = best_q;
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) z += p[i] * std::exp(r[i] / beta);
    report.q_gibbs.resize(k);
    double min_gibbs = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        report.q_gibbs[i] = p[i] * std::exp(r[i] / beta) / z;
        min_gibbs = std::min(min_gibbs, report.q_gibbs[i]);
        report.max_gap = std::max(report.max_gap, std::fabs(best_q[i] - report.q_gibbs[i]));
    }
    // r_i should be recoverable from the maximizer: r_i = beta*log(q_i/p_i)
    // + beta*log Z. Tolerance scales with how much a one-step grid error
    // perturbs the log at the smallest Gibbs coordinate.
    report.reward_residual_tol = 3.0 * beta * step / min_gibbs;
    const double log_z = std::log(z);
    for (std::size_t i = 0; i < k; ++i) {
        if (best_q[i] <= 0.0) {
            report.max_reward_residual = 1e300;  // boundary hit: residual undefined
            continue;
        }
        double residual = std::fabs(r[i] - beta * std::log(best_q[i] / p[i]) - beta * log_z);
        report.max_reward_residual = std::max(report.max_reward_residual, residual);
    }
    return report;
}

}  // namespace sigood
