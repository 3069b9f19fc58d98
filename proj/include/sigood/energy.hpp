#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "sigood/gnn.hpp"
#include "sigood/matrix.hpp"

namespace sigood {

inline constexpr double kDefaultEpsPos = 1e-6;

// E = -log(exp(f1) + exp(f2)); higher means less confident, more OOD-like.
double node_energy(double f1, double f2);

// Strictly positive monotone shift so every later log-ratio is defined.
double positive_energy(double e_hat, double eps_pos = kDefaultEpsPos);

// log(e_p / e_t); requires both strictly positive.
double energy_variation(double e_p, double e_t);

// Per-node positive energies of an embedding matrix under the head.
Matrix positive_energies(const Matrix& embeddings, const ScoringHead& head,
                         double eps_pos = kDefaultEpsPos);  // [n x 1]

struct Partition {
    std::vector<std::size_t> ood;
    std::vector<std::size_t> id;
    bool fallback_used = false;
};

// Primary rule: delta > 0 goes OOD, delta <= 0 goes ID. If either side ends
// up empty, re-split at the median (strictly above -> OOD); if that still
// leaves a side empty (all values equal, or the median coincides with the
// maximum), the first ceil(n/2) nodes go OOD.
Partition partition_nodes(const std::vector<double>& delta_e);

struct EnergyReport {
    std::vector<double> raw_energy;  // E per node
    std::vector<double> pos_energy;  // strictly positive
    std::vector<double> delta_e;
    Partition partition;
};

// Energies of the prompted embeddings against reference positive energies.
EnergyReport build_energy_report(const Matrix& prompted_embeddings, const Matrix& reference_pos,
                                 const ScoringHead& head, double eps_pos = kDefaultEpsPos);

// One row per node: index, raw, positive, delta, side, for external plots.
void write_energy_report_csv(const EnergyReport& report, const std::filesystem::path& path);

}  // namespace sigood
