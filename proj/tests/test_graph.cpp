#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sigood/graph.hpp"
#include "sigood/rng.hpp"

using sigood::Graph;
using sigood::Matrix;

TEST_CASE("triangle adjacency is all-ones off-diagonal") {
    const Graph g = sigood::build_graph(3, {{0, 1}, {1, 2}, {0, 2}}, Matrix(3, 2, 0.0));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(g.adjacency(i, j) == (i == j ? 0.0 : 1.0));
        }
    }
    CHECK(g.edges.size() == 3);
}

TEST_CASE("single node graph has zero adjacency") {
    const Graph g = sigood::build_graph(1, {}, Matrix(1, 4, 0.0));
    CHECK(g.adjacency.rows() == 1);
    CHECK(g.adjacency(0, 0) == 0.0);
    CHECK(g.feature_dim() == 4);
}

TEST_CASE("construction rejects bad inputs") {
    CHECK_THROWS_AS(sigood::build_graph(2, {{0, 0}}, Matrix(2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(sigood::build_graph(2, {{0, 2}}, Matrix(2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(sigood::build_graph(3, {{0, 1}}, Matrix(2, 1)), std::invalid_argument);
}

TEST_CASE("duplicate and reversed edges collapse to one") {
    const Graph g = sigood::build_graph(3, {{1, 0}, {0, 1}, {1, 0}}, Matrix(3, 1, 0.0));
    CHECK(g.edges.size() == 1);
    CHECK(g.edges[0].first == 0);
    CHECK(g.edges[0].second == 1);
    CHECK(g.adjacency(0, 1) == 1.0);
    CHECK(g.adjacency(1, 0) == 1.0);
}

TEST_CASE("adjacency equals its transpose for random graphs") {
    sigood::Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3 + rng.bounded(6);
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.uniform() < 0.4) edges.push_back({i, j});
        const Graph g = sigood::build_graph(n, edges, Matrix(n, 2, 1.0));
        CHECK(g.adjacency == g.adjacency.transpose());
    }
}

TEST_CASE("node permutation conjugates the adjacency") {
    sigood::Rng rng(32);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 4 + rng.bounded(4);
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        Matrix feats(n, 3);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 3; ++j) feats(i, j) = rng.normal();
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.uniform() < 0.5) edges.push_back({i, j});
        }
        const Graph g = sigood::build_graph(n, edges, feats);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm);

        Matrix p(n, n, 0.0);  // P(new, old) = 1 where new = perm[old]
        for (std::size_t old = 0; old < n; ++old) p(perm[old], old) = 1.0;

        std::vector<std::pair<std::size_t, std::size_t>> pedges;
        for (const auto& e : edges) pedges.push_back({perm[e.first], perm[e.second]});
        Matrix pfeats(n, 3);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 3; ++j) pfeats(perm[i], j) = feats(i, j);
        const Graph pg = sigood::build_graph(n, pedges, pfeats);

        const Matrix expected = matmul(matmul(p, g.adjacency), p.transpose());
        CHECK(pg.adjacency == expected);
    }
}

TEST_CASE("validate_dataset flags injected violations") {
    sigood::Dataset ds;
    ds.name = "valid";
    ds.feature_dim = 2;
    sigood::LabeledGraph lg;
    lg.graph = sigood::build_graph(3, {{0, 1}}, Matrix(3, 2, 0.5));
    lg.class_label = 0;
    ds.graphs.push_back(lg);
    CHECK(sigood::validate_dataset(ds).ok());

    SUBCASE("asymmetric adjacency") {
        sigood::Dataset bad = ds;
        bad.graphs[0].graph.adjacency(0, 2) = 1.0;  // without the mirror entry
        const auto report = sigood::validate_dataset(bad);
        CHECK_FALSE(report.ok());
        CHECK(report.violations.size() >= 1);
    }
    SUBCASE("mixed feature dims") {
        sigood::Dataset bad = ds;
        sigood::LabeledGraph other;
        other.graph = sigood::build_graph(2, {}, Matrix(2, 5, 0.0));
        other.class_label = 0;
        bad.graphs.push_back(other);
        CHECK_FALSE(sigood::validate_dataset(bad).ok());
    }
    SUBCASE("bad dist label") {
        sigood::Dataset bad = ds;
        bad.graphs[0].dist_label = 7;
        CHECK_FALSE(sigood::validate_dataset(bad).ok());
    }
    SUBCASE("negative class label") {
        sigood::Dataset bad = ds;
        bad.graphs[0].class_label = -1;
        CHECK_FALSE(sigood::validate_dataset(bad).ok());
    }
}
