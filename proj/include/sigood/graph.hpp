#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sigood/matrix.hpp"

namespace sigood {

// Undirected simple graph with dense node features. Immutable once built:
// construct through build_graph, which validates and canonicalizes.
struct Graph {
    std::size_t node_count = 0;
    // Canonical form: first < second, sorted, no duplicates.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    Matrix features;   // [node_count x d]
    Matrix adjacency;  // [node_count x node_count], symmetric 0/1, zero diagonal

    std::size_t feature_dim() const { return features.cols(); }
};

// Validates endpoints, rejects self-loops, dedupes and symmetrizes edges,
// builds the adjacency matrix. Throws std::invalid_argument on bad input.
Graph build_graph(std::size_t node_count,
                  std::vector<std::pair<std::size_t, std::size_t>> edges,
                  Matrix features);

struct LabeledGraph {
    Graph graph;
    int class_label = 0;
    std::optional<int> dist_label;  // 0 = in-distribution, 1 = OOD; absent if unknown
};

struct Dataset {
    std::vector<LabeledGraph> graphs;
    std::size_t feature_dim = 0;
    std::string name;

    std::size_t size() const { return graphs.size(); }
    bool empty() const { return graphs.empty(); }
};

// Checks every invariant; violations are data, not exceptions.
struct ValidationReport {
    std::vector<std::string> violations;  // each names the offending graph index
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_dataset(const Dataset& dataset);

}  // namespace sigood
