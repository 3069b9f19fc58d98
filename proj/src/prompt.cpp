#include "sigood/prompt.hpp"

#include <cmath>
#include <stdexcept>

#include "sigood/rng.hpp"

namespace sigood {

PromptGenParams init_prompt_gen(std::size_t hidden_dim, int depth, std::uint64_t seed) {
    if (depth < 1 || depth > 3) throw std::invalid_argument("prompt depth must be 1, 2 or 3");
    if (hidden_dim == 0) throw std::invalid_argument("prompt hidden_dim must be positive");
    Rng rng(seed);
    auto uniform = [&rng, hidden_dim]() {
        Matrix m(hidden_dim, hidden_dim);
        for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-0.1, 0.1);
        return m;
    };
    PromptGenParams p;
    p.depth = depth;
    p.w1 = uniform();
    p.b1 = Matrix(1, hidden_dim);
    p.w2 = uniform();
    p.b2 = Matrix(1, hidden_dim);
    p.w3 = Matrix(hidden_dim, hidden_dim);
    p.b3 = Matrix(1, hidden_dim);
    p.gamma = Matrix(1, hidden_dim, 1.0);
    p.lambda = Matrix(1, hidden_dim);
    return p;
}

Matrix generate_prompt(const Matrix& embeddings, const PromptGenParams& params) {
    const std::size_t h = params.w3.rows();
    if (embeddings.cols() != h)
        throw std::invalid_argument("generate_prompt: embedding dim " +
                                    std::to_string(embeddings.cols()) + " != prompt dim " +
                                    std::to_string(h));
    auto relu = [](double v) { return v > 0.0 ? v : 0.0; };
    Matrix v = embeddings;
    if (params.depth >= 2) v = add_row_broadcast(matmul(v, params.w1), params.b1).map(relu);
    if (params.depth >= 3) v = add_row_broadcast(matmul(v, params.w2), params.b2).map(relu);
    // Row normalization with computed statistics, then the output projection.
    Matrix normed(v.rows(), v.cols());
    for (std::size_t i = 0; i < v.rows(); ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < h; ++j) mu += v(i, j);
        mu /= static_cast<double>(h);
        double var = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
            double d = v(i, j) - mu;
            var += d * d;
        }
        var /= static_cast<double>(h);
        double inv_s = 1.0 / std::sqrt(var + params.epsilon_ln);
        for (std::size_t j = 0; j < h; ++j)
            normed(i, j) = params.gamma(0, j) * ((v(i, j) - mu) * inv_s) + params.lambda(0, j);
    }
    return add_row_broadcast(matmul(normed, params.w3), params.b3);
}

PromptLeaves leaf_prompt_gen(ad::Tape& tape, const PromptGenParams& params) {
    return PromptLeaves{tape.leaf(params.w1, "pg_w1"),    tape.leaf(params.b1, "pg_b1"),
                        tape.leaf(params.w2, "pg_w2"),    tape.leaf(params.b2, "pg_b2"),
                        tape.leaf(params.w3, "pg_w3"),    tape.leaf(params.b3, "pg_b3"),
                        tape.leaf(params.gamma, "pg_gamma"), tape.leaf(params.lambda, "pg_lambda")};
}

ad::DiffValue generate_prompt_diff(ad::Tape& tape, ad::DiffValue embeddings,
                                   const PromptLeaves& leaves, const PromptGenParams& params) {
    ad::DiffValue v = embeddings;
    if (params.depth >= 2) v = ad::relu(ad::linear(v, leaves.w1, leaves.b1));
    if (params.depth >= 3) v = ad::relu(ad::linear(v, leaves.w2, leaves.b2));
    ad::DiffValue normed = ad::layer_norm(v, leaves.gamma, leaves.lambda, params.epsilon_ln);
    (void)tape;
    return ad::linear(normed, leaves.w3, leaves.b3);
}

EmbeddedGraph inject_prompt(const EmbeddedGraph& graph, const Matrix& prompt) {
    if (!graph.embeddings.same_shape(prompt))
        throw std::invalid_argument("inject_prompt: prompt " + prompt.shape_str() +
                                    " vs embeddings " + graph.embeddings.shape_str());
    EmbeddedGraph out;
    out.embeddings = graph.embeddings;
    out.embeddings += prompt;
    out.origin = graph.origin;
    return out;
}

void apply_prompt_gradients(PromptGenParams& params, const PromptLeaves& leaves, double lr) {
    auto step = [lr](Matrix& param, ad::DiffValue leaf) {
        if (!leaf.tape->grad_set(leaf.id)) return;
        const Matrix& g = leaf.grad();
        for (std::size_t i = 0; i < param.size(); ++i) param.data()[i] -= lr * g.data()[i];
    };
    step(params.w1, leaves.w1);
    step(params.b1, leaves.b1);
    step(params.w2, leaves.w2);
    step(params.b2, leaves.b2);
    step(params.w3, leaves.w3);
    step(params.b3, leaves.b3);
    step(params.gamma, leaves.gamma);
    step(params.lambda, leaves.lambda);
}

}  // namespace sigood
