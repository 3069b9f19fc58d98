#pragma once

#include <cstdint>

#include "sigood/autodiff.hpp"
#include "sigood/gnn.hpp"
#include "sigood/matrix.hpp"

namespace sigood {

// Per-node prompt network: depth counts the weight matrices applied,
// including the output projection. depth 3 runs both hidden ReLU layers,
// depth 2 one, depth 1 none; row normalization and the output projection
// always run. With w3 = b3 = 0 the prompt is identically zero, so the
// first detector iterate leaves the embedded graph unchanged.
struct PromptGenParams {
    Matrix w1, b1;      // [h x h], [1 x h]
    Matrix w2, b2;      // [h x h], [1 x h]
    Matrix w3, b3;      // [h x h], [1 x h]
    Matrix gamma;       // [1 x h], starts at ones
    Matrix lambda;      // [1 x h], starts at zeros
    double epsilon_ln = 1e-5;
    int depth = 3;
};

// Seeded init: hidden weights uniform in [-0.1, 0.1], output projection and
// all biases zero, gamma = 1, lambda = 0.
PromptGenParams init_prompt_gen(std::size_t hidden_dim, int depth, std::uint64_t seed);

// Plain forward pass, one prompt row per embedding row.
Matrix generate_prompt(const Matrix& embeddings, const PromptGenParams& params);

// Handles to the parameter leaves of one tape, for gradient steps.
struct PromptLeaves {
    ad::DiffValue w1, b1, w2, b2, w3, b3, gamma, lambda;
};

PromptLeaves leaf_prompt_gen(ad::Tape& tape, const PromptGenParams& params);

// Differentiable forward pass over previously created leaves.
ad::DiffValue generate_prompt_diff(ad::Tape& tape, ad::DiffValue embeddings,
                                   const PromptLeaves& leaves, const PromptGenParams& params);

// Elementwise addition of the prompt onto the node embeddings.
EmbeddedGraph inject_prompt(const EmbeddedGraph& graph, const Matrix& prompt);

// One gradient-descent step, reading accumulated leaf gradients.
void apply_prompt_gradients(PromptGenParams& params, const PromptLeaves& leaves, double lr);

}  // namespace sigood
