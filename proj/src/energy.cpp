#include "sigood/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sigood/numerics.hpp"

namespace sigood {

double node_energy(double f1, double f2) {
    double m = std::max(f1, f2);
    return -(m + std::log(std::exp(f1 - m) + std::exp(f2 - m)));
}

double positive_energy(double e_hat, double eps_pos) { return softplus(e_hat) + eps_pos; }

double energy_variation(double e_p, double e_t) {
    if (!(e_p > 0.0) || !(e_t > 0.0))
        throw std::domain_error("energy_variation: inputs must be strictly positive");
    return std::log(e_p / e_t);
}

Matrix positive_energies(const Matrix& embeddings, const ScoringHead& head, double eps_pos) {
    Matrix logits = score_logits(embeddings, head);
    Matrix out(logits.rows(), 1);
    for (std::size_t i = 0; i < logits.rows(); ++i)
        out(i, 0) = positive_energy(node_energy(logits(i, 0), logits(i, 1)), eps_pos);
    return out;
}

Partition partition_nodes(const std::vector<double>& delta_e) {
    const std::size_t n = delta_e.size();
    if (n == 0) throw std::invalid_argument("partition_nodes: empty input");
    Partition p;
    for (std::size_t i = 0; i < n; ++i)
        (delta_e[i] > 0.0 ? p.ood : p.id).push_back(i);
    if (!p.ood.empty() && !p.id.empty()) return p;

    p.fallback_used = true;
    p.ood.clear();
    p.id.clear();
    std::vector<double> sorted = delta_e;
    std::sort(sorted.begin(), sorted.end());
    const double median = (n % 2 == 1)
                              ? sorted[n / 2]
                              : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    for (std::size_t i = 0; i < n; ++i)
        (delta_e[i] > median ? p.ood : p.id).push_back(i);
    if (!p.ood.empty() && !p.id.empty()) return p;

    // Degenerate: nothing strictly above the median (all equal, or the
    // median equals the maximum). Deterministic positional split.
    p.ood.clear();
    p.id.clear();
    const std::size_t k = (n + 1) / 2;
    for (std::size_t i = 0; i < n; ++i)
        (i < k ? p.ood : p.id).push_back(i);
    return p;
}

EnergyReport build_energy_report(const Matrix& prompted_embeddings, const Matrix& reference_pos,
                                 const ScoringHead& head, double eps_pos) {
    const std::size_t n = prompted_embeddings.rows();
    if (reference_pos.rows() != n || reference_pos.cols() != 1)
        throw std::invalid_argument("build_energy_report: reference shape " +
                                    reference_pos.shape_str() + " for " + std::to_string(n) +
                                    " nodes");
    Matrix logits = score_logits(prompted_embeddings, head);
    EnergyReport report;
    report.raw_energy.resize(n);
    report.pos_energy.resize(n);
    report.delta_e.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.raw_energy[i] = node_energy(logits(i, 0), logits(i, 1));
        report.pos_energy[i] = positive_energy(report.raw_energy[i], eps_pos);
        report.delta_e[i] = energy_variation(report.pos_energy[i], reference_pos(i, 0));
    }
    report.partition = partition_nodes(report.delta_e);
    return report;
}

void write_energy_report_csv(const EnergyReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "node,raw_energy,pos_energy,delta_e,side\n";
    std::vector<char> side(report.raw_energy.size(), 'i');
    for (std::size_t i : report.partition.ood) side[i] = 'o';
    char buf[128];
    for (std::size_t i = 0; i < report.raw_energy.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%s\n", i, report.raw_energy[i],
                      report.pos_energy[i], report.delta_e[i], side[i] == 'o' ? "ood" : "id");
        out << buf;
    }
}

}  // namespace sigood
