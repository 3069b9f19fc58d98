#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sigood/graph.hpp"
#include "sigood/matrix.hpp"

namespace sigood {

// One message-passing layer: aggregate (1+eps)*self + neighbor sum, then a
// two-linear MLP with ReLU after each linear.
struct GinLayer {
    Matrix w1, b1;  // [in x h], [1 x h]
    Matrix w2, b2;  // [h x h], [1 x h]
};

struct EncoderParams {
    std::vector<GinLayer> layers;
    double epsilon_gin = 0.0;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
};

enum class Readout { mean, sum, max };

std::string to_string(Readout r);
Readout readout_from_string(const std::string& s);

// Maps a node embedding to 2 logits; the energy score is derived from them.
struct ScoringHead {
    Matrix w;  // [hidden_dim x 2]
    Matrix b;  // [1 x 2]
};

// Everything detection depends on; immutable once pretraining returns.
struct FrozenModel {
    EncoderParams encoder;
    Matrix classifier;  // [hidden_dim x n_classes]
    ScoringHead head;
    Readout readout = Readout::mean;
};

struct EmbeddedGraph {
    Matrix embeddings;  // [n x hidden_dim]
    const Graph* origin = nullptr;
};

// (1+eps)*I + A: left-multiplying node features by this performs the
// self-plus-neighbor-sum aggregation.
Matrix gin_aggregation(const Graph& graph, double epsilon_gin);

EmbeddedGraph encode(const Graph& graph, const EncoderParams& encoder);
// Same forward pass with caller-supplied features (corrupted copies etc.).
Matrix encode_features(const Matrix& aggregation, const Matrix& features,
                       const EncoderParams& encoder);

Matrix readout_embedding(const EmbeddedGraph& graph, Readout mode);  // [1 x h]

Matrix score_logits(const Matrix& embeddings, const ScoringHead& head);  // [n x 2]

struct PretrainConfig {
    std::size_t epochs = 200;
    double lr = 1e-2;
    std::size_t hidden_dim = 32;
    std::size_t n_layers = 2;
    std::uint64_t seed = 0;
    double energy_margin = 1.0;        // m_id: push ID node energies below this
    double margin_weight = 0.1;        // w: weight of the energy hinge terms
    double negative_margin = 3.0;      // single-class mode: push corrupted copies above this
    double negative_noise_std = 3.0;   // feature noise scale for corrupted copies
    bool train_scoring_head = true;    // false = frozen-random-head fallback
    Readout readout = Readout::mean;
};

// >= 2 classes: trains encoder + classifier by cross-entropy, plus the
// scoring head by the ID energy hinge. Single class: keeps the seeded
// random encoder frozen and trains only the head, with the ID hinge plus a
// margin hinge on noise-corrupted feature copies. Deterministic per seed.
FrozenModel pretrain(const Dataset& train, const PretrainConfig& config);

// Mean training cross-entropy of the classifier (diagnostic).
double classifier_cross_entropy(const Dataset& data, const FrozenModel& model);
// Mean positive node energy over a dataset under the current head.
double mean_positive_energy(const Dataset& data, const FrozenModel& model, double eps_pos);

// Text checkpoint; load(save(m)) reproduces every parameter bit.
void save_model(const FrozenModel& model, const std::filesystem::path& path);
FrozenModel load_model(const std::filesystem::path& path);

// Order-fixed FNV-1a over the bit patterns of every parameter.
std::uint64_t model_checksum(const FrozenModel& model);

}  // namespace sigood
