#include "sigood/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sigood {

Graph build_graph(std::size_t node_count,
                  std::vector<std::pair<std::size_t, std::size_t>> edges, Matrix features) {
    if (features.rows() != node_count)
        throw std::invalid_argument("build_graph: " + std::to_string(features.rows()) +
                                    " feature rows for " + std::to_string(node_count) + " nodes");
    for (auto& [u, v] : edges) {
        if (u == v)
            throw std::invalid_argument("build_graph: self-loop at node " + std::to_string(u));
        if (u >= node_count || v >= node_count)
            throw std::invalid_argument("build_graph: edge (" + std::to_string(u) + "," +
                                        std::to_string(v) + ") endpoint out of range");
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Graph g;
    g.node_count = node_count;
    g.features = std::move(features);
    g.adjacency = Matrix(node_count, node_count);
    for (const auto& [u, v] : edges) {
        g.adjacency(u, v) = 1.0;
        g.adjacency(v, u) = 1.0;
    }
    g.edges = std::move(edges);
    return g;
}

ValidationReport validate_dataset(const Dataset& dataset) {
    ValidationReport report;
    auto flag = [&report](std::size_t idx, const std::string& what) {
        report.violations.push_back("graph " + std::to_string(idx) + ": " + what);
    };
    for (std::size_t idx = 0; idx < dataset.graphs.size(); ++idx) {
        const LabeledGraph& lg = dataset.graphs[idx];
        const Graph& g = lg.graph;
        std::size_t n = g.node_count;
        if (g.features.rows() != n) flag(idx, "feature rows != node count");
        if (g.feature_dim() != dataset.feature_dim)
            flag(idx, "feature dim " + std::to_string(g.feature_dim()) + " != dataset dim " +
                          std::to_string(dataset.feature_dim));
        if (g.adjacency.rows() != n || g.adjacency.cols() != n) {
            flag(idx, "adjacency shape != node count");
            continue;
        }
        bool symmetric = true, zero_diag = true, binary = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (g.adjacency(i, i) != 0.0) zero_diag = false;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (g.adjacency(i, j) != g.adjacency(j, i)) symmetric = false;
                double a = g.adjacency(i, j);
                if (a != 0.0 && a != 1.0) binary = false;
            }
        }
        if (!symmetric) flag(idx, "adjacency not symmetric");
        if (!zero_diag) flag(idx, "adjacency has self-loops");
        if (!binary) flag(idx, "adjacency entries not 0/1");
        for (const auto& [u, v] : g.edges) {
            if (u >= n || v >= n) {
                flag(idx, "edge endpoint out of range");
                break;
            }
        }
        if (lg.dist_label && *lg.dist_label != 0 && *lg.dist_label != 1)
            flag(idx, "dist_label not in {0,1}");
        if (lg.class_label < 0) flag(idx, "negative class label");
    }
    return report;
}

}  // namespace sigood
