#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sigood/graph.hpp"

namespace sigood {

enum class SynthFamily { er_feature_shift, motif_shift, density_shift };
enum class Motif { none, triangle, star };

std::string to_string(SynthFamily family);
std::string to_string(Motif motif);
SynthFamily synth_family_from_string(const std::string& s);
Motif motif_from_string(const std::string& s);

struct SynthSpec {
    SynthFamily family = SynthFamily::er_feature_shift;
    std::size_t n_graphs = 0;
    std::size_t nodes_min = 0;
    std::size_t nodes_max = 0;
    double edge_prob = 0.3;
    std::vector<double> feature_mean;  // length d
    double feature_std = 1.0;
    Motif motif = Motif::none;
    std::uint64_t seed = 0;
};

// Reads <NAME>_A.txt, _graph_indicator.txt, _graph_labels.txt and the
// optional _node_labels.txt / _node_attributes.txt / _dist_labels.txt.
// File indices are 1-based on disk, 0-based in memory. Node labels become
// one-hot columns (sorted distinct values); when attributes are also
// present, features = [one-hot | attributes].
Dataset parse_tu_dataset(const std::filesystem::path& directory, const std::string& name);

// Inverse of parse_tu_dataset up to text-decimal precision: features are
// written as node attributes with 9 significant digits. Distribution labels
// are written iff every graph carries one.
void write_tu_dataset(const Dataset& dataset, const std::filesystem::path& directory);

// Deterministic generator: identical spec (seed included) gives a bitwise
// identical dataset.
Dataset synth_dataset(const SynthSpec& spec);

// 1:1 mixed test set: first min(|id|,|ood|) graphs of each side, tagged
// dist_label 0/1, order shuffled by seed.
Dataset mix_test_set(const Dataset& id, const Dataset& ood, std::uint64_t seed);

// Minority class becomes the anomaly (dist_label 1, all in test); majority
// classes split 80/20 into train (labels stripped) and test (dist_label 0).
// Ties on class counts break toward the lower class index.
std::pair<Dataset, Dataset> anomaly_split(const Dataset& dataset, std::uint64_t seed = 0);

}  // namespace sigood
