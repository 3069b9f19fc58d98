#include "sigood/gnn.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "sigood/autodiff.hpp"
#include "sigood/numerics.hpp"
#include "sigood/rng.hpp"

namespace sigood {

namespace {

constexpr double kEpsPos = 1e-6;

Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

}  // namespace

std::string to_string(Readout r) {
    switch (r) {
        case Readout::mean: return "mean";
        case Readout::sum: return "sum";
        case Readout::max: return "max";
    }
    return "?";
}

Readout readout_from_string(const std::string& s) {
    if (s == "mean") return Readout::mean;
    if (s == "sum") return Readout::sum;
    if (s == "max") return Readout::max;
    throw std::invalid_argument("unknown readout '" + s + "'");
}

Matrix gin_aggregation(const Graph& graph, double epsilon_gin) {
    Matrix agg = graph.adjacency;
    for (std::size_t i = 0; i < graph.node_count; ++i) agg(i, i) = 1.0 + epsilon_gin;
    return agg;
}

Matrix encode_features(const Matrix& aggregation, const Matrix& features,
                       const EncoderParams& encoder) {
    if (features.cols() != encoder.input_dim)
        throw std::invalid_argument("encode: feature dim " + std::to_string(features.cols()) +
                                    " != encoder input dim " + std::to_string(encoder.input_dim));
    Matrix h = features;
    for (const GinLayer& layer : encoder.layers) {
        Matrix m = matmul(aggregation, h);
        Matrix t = add_row_broadcast(matmul(m, layer.w1), layer.b1);
        t = t.map([](double v) { return v > 0.0 ? v : 0.0; });
        Matrix out = add_row_broadcast(matmul(t, layer.w2), layer.b2);
        h = out.map([](double v) { return v > 0.0 ? v : 0.0; });
    }
    return h;
}

EmbeddedGraph encode(const Graph& graph, const EncoderParams& encoder) {
    if (graph.node_count == 0) throw std::invalid_argument("encode: empty graph");
    EmbeddedGraph out;
    out.embeddings = encode_features(gin_aggregation(graph, encoder.epsilon_gin), graph.features,
                                     encoder);
    out.origin = &graph;
    return out;
}

Matrix readout_embedding(const EmbeddedGraph& graph, Readout mode) {
    const Matrix& e = graph.embeddings;
    if (e.rows() == 0) throw std::invalid_argument("readout: empty graph");
    Matrix out(1, e.cols());
    switch (mode) {
        case Readout::mean: {
            out = col_sums(e);
            out *= 1.0 / static_cast<double>(e.rows());
            break;
        }
        case Readout::sum: {
            out = col_sums(e);
            break;
        }
        case Readout::max: {
            for (std::size_t j = 0; j < e.cols(); ++j) {
                double best = e(0, j);
                for (std::size_t i = 1; i < e.rows(); ++i) best = std::max(best, e(i, j));
                out(0, j) = best;
            }
            break;
        }
    }
    return out;
}

Matrix score_logits(const Matrix& embeddings, const ScoringHead& head) {
    if (embeddings.cols() != head.w.rows())
        throw std::invalid_argument("score_logits: embedding dim " +
                                    std::to_string(embeddings.cols()) + " != head dim " +
                                    std::to_string(head.w.rows()));
    return add_row_broadcast(matmul(embeddings, head.w), head.b);
}

namespace {

struct EncoderLeaves {
    std::vector<std::array<ad::DiffValue, 4>> layers;  // w1, b1, w2, b2 per layer
};

EncoderLeaves leaf_encoder(ad::Tape& tape, const EncoderParams& enc) {
    EncoderLeaves out;
    for (const GinLayer& layer : enc.layers)
        out.layers.push_back({tape.leaf(layer.w1, "w1"), tape.leaf(layer.b1, "b1"),
                              tape.leaf(layer.w2, "w2"), tape.leaf(layer.b2, "b2")});
    return out;
}

ad::DiffValue encode_diff(ad::Tape& tape, const Matrix& agg, const Matrix& features,
                          const EncoderLeaves& leaves) {
    ad::DiffValue h = tape.leaf(features, "features");
    for (const auto& layer : leaves.layers) {
        ad::DiffValue m = ad::left_matmul_const(agg, h);
        ad::DiffValue t = ad::relu(ad::linear(m, layer[0], layer[1]));
        h = ad::relu(ad::linear(t, layer[2], layer[3]));
    }
    return h;
}

// logits -> strictly positive per-node energy, on the tape.
ad::DiffValue positive_energy_diff(ad::DiffValue logits) {
    ad::DiffValue e_hat = ad::neg(ad::row_logsumexp(logits));
    return ad::add_scalar(ad::softplus(e_hat), kEpsPos);
}

void sgd_update(Matrix& param, ad::DiffValue leaf, double lr) {
    if (!leaf.tape->grad_set(leaf.id)) return;
    const Matrix& g = leaf.grad();
    for (std::size_t i = 0; i < param.size(); ++i) param.data()[i] -= lr * g.data()[i];
}

FrozenModel init_model(const Dataset& train, const PretrainConfig& cfg, std::size_t n_classes) {
    Rng rng(cfg.seed);
    FrozenModel model;
    model.readout = cfg.readout;
    model.encoder.epsilon_gin = 0.0;
    model.encoder.input_dim = train.feature_dim;
    model.encoder.hidden_dim = cfg.hidden_dim;
    std::size_t in = train.feature_dim;
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        GinLayer layer;
        layer.w1 = uniform_matrix(rng, in, cfg.hidden_dim, -0.1, 0.1);
        layer.b1 = Matrix(1, cfg.hidden_dim);
        layer.w2 = uniform_matrix(rng, cfg.hidden_dim, cfg.hidden_dim, -0.1, 0.1);
        layer.b2 = Matrix(1, cfg.hidden_dim);
        model.encoder.layers.push_back(std::move(layer));
        in = cfg.hidden_dim;
    }
    model.classifier = uniform_matrix(rng, cfg.hidden_dim, n_classes, -0.1, 0.1);
    model.head.w = uniform_matrix(rng, cfg.hidden_dim, 2, -0.1, 0.1);
    // Biased so initial energies sit above the ID margin: the hinge is
    // active from the first step and training can only lower ID energy.
    model.head.b = Matrix{{-3.0, -3.0}};
    return model;
}

ad::DiffValue readout_diff(ad::DiffValue h, Readout mode) {
    switch (mode) {
        case Readout::mean: return ad::mean_rows(h);
        case Readout::sum: return ad::sum_rows(h);
        case Readout::max: return ad::colwise_max(h);
    }
    throw std::logic_error("readout_diff: bad mode");
}

void pretrain_multiclass(const Dataset& train, const PretrainConfig& cfg, FrozenModel& model) {
    std::vector<Matrix> aggs;
    std::size_t total_nodes = 0;
    for (const auto& lg : train.graphs) {
        aggs.push_back(gin_aggregation(lg.graph, model.encoder.epsilon_gin));
        total_nodes += lg.graph.node_count;
    }
    const bool train_head = cfg.train_scoring_head && cfg.margin_weight > 0.0;
    const double g_count = static_cast<double>(train.size());

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        ad::Tape tape;
        EncoderLeaves enc = leaf_encoder(tape, model.encoder);
        ad::DiffValue clf = tape.leaf(model.classifier, "classifier");
        ad::DiffValue head_w = tape.leaf(model.head.w, "head_w");
        ad::DiffValue head_b = tape.leaf(model.head.b, "head_b");

        ad::DiffValue ce_sum;
        ad::DiffValue hinge_sum;
        bool have_ce = false, have_hinge = false;
        for (std::size_t g = 0; g < train.size(); ++g) {
            const LabeledGraph& lg = train.graphs[g];
            ad::DiffValue h = encode_diff(tape, aggs[g], lg.graph.features, enc);
            ad::DiffValue logits = ad::matmul(readout_diff(h, cfg.readout), clf);
            ad::DiffValue ce = ad::sub(ad::row_logsumexp(logits),
                                       ad::entry(logits, 0, static_cast<std::size_t>(lg.class_label)));
            ce_sum = have_ce ? ad::add(ce_sum, ce) : ce;
            have_ce = true;
            if (train_head) {
                ad::DiffValue epos = positive_energy_diff(ad::linear(h, head_w, head_b));
                ad::DiffValue hinge = ad::sum_rows(ad::relu(ad::add_scalar(epos, -cfg.energy_margin)));
                hinge_sum = have_hinge ? ad::add(hinge_sum, hinge) : hinge;
                have_hinge = true;
            }
        }
        ad::DiffValue loss = ad::mul_scalar(ce_sum, 1.0 / g_count);
        if (have_hinge)
            loss = ad::add(loss, ad::mul_scalar(hinge_sum, cfg.margin_weight /
                                                               static_cast<double>(total_nodes)));
        tape.backward(loss);
        for (std::size_t l = 0; l < model.encoder.layers.size(); ++l) {
            sgd_update(model.encoder.layers[l].w1, enc.layers[l][0], cfg.lr);
            sgd_update(model.encoder.layers[l].b1, enc.layers[l][1], cfg.lr);
            sgd_update(model.encoder.layers[l].w2, enc.layers[l][2], cfg.lr);
            sgd_update(model.encoder.layers[l].b2, enc.layers[l][3], cfg.lr);
        }
        sgd_update(model.classifier, clf, cfg.lr);
        if (train_head) {
            sgd_update(model.head.w, head_w, cfg.lr);
            sgd_update(model.head.b, head_b, cfg.lr);
        }
    }
}

void pretrain_energy_only(const Dataset& train, const PretrainConfig& cfg, FrozenModel& model) {
    if (!cfg.train_scoring_head || cfg.margin_weight <= 0.0) return;  // nothing trains
    std::vector<Matrix> aggs;
    std::vector<Matrix> id_embeddings;
    std::size_t total_nodes = 0;
    for (const auto& lg : train.graphs) {
        aggs.push_back(gin_aggregation(lg.graph, model.encoder.epsilon_gin));
        id_embeddings.push_back(encode_features(aggs.back(), lg.graph.features, model.encoder));
        total_nodes += lg.graph.node_count;
    }
    const double node_scale = cfg.margin_weight / static_cast<double>(total_nodes);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fresh corrupted copies each epoch: same topology, noisy features.
        Rng noise(derive_seed(cfg.seed, "neg-epoch-" + std::to_string(epoch)));
        ad::Tape tape;
        ad::DiffValue head_w = tape.leaf(model.head.w, "head_w");
        ad::DiffValue head_b = tape.leaf(model.head.b, "head_b");

        ad::DiffValue loss_sum;
        bool have = false;
        for (std::size_t g = 0; g < train.size(); ++g) {
            const Graph& graph = train.graphs[g].graph;
            ad::DiffValue emb = tape.leaf(id_embeddings[g], "emb");
            ad::DiffValue epos = positive_energy_diff(ad::linear(emb, head_w, head_b));
            ad::DiffValue hinge_id =
                ad::sum_rows(ad::relu(ad::add_scalar(epos, -cfg.energy_margin)));

            Matrix noisy = graph.features;
            for (std::size_t i = 0; i < noisy.size(); ++i)
                noisy.data()[i] += cfg.negative_noise_std * noise.normal();
            ad::DiffValue emb_neg =
                tape.leaf(encode_features(aggs[g], noisy, model.encoder), "emb_neg");
            ad::DiffValue epos_neg = positive_energy_diff(ad::linear(emb_neg, head_w, head_b));
            ad::DiffValue hinge_neg = ad::sum_rows(
                ad::relu(ad::add_scalar(ad::neg(epos_neg), cfg.negative_margin)));

            ad::DiffValue term = ad::add(hinge_id, hinge_neg);
            loss_sum = have ? ad::add(loss_sum, term) : term;
            have = true;
        }
        ad::DiffValue loss = ad::mul_scalar(loss_sum, node_scale);
        tape.backward(loss);
        sgd_update(model.head.w, head_w, cfg.lr);
        sgd_update(model.head.b, head_b, cfg.lr);
    }
}

}  // namespace

FrozenModel pretrain(const Dataset& train, const PretrainConfig& config) {
    if (train.empty()) throw std::invalid_argument("pretrain: empty train set");
    if (config.n_layers == 0 || config.hidden_dim == 0)
        throw std::invalid_argument("pretrain: need n_layers >= 1 and hidden_dim >= 1");
    std::set<int> classes;
    for (const auto& lg : train.graphs) classes.insert(lg.class_label);
    FrozenModel model = init_model(train, config, std::max<std::size_t>(classes.size(), 1));
    if (classes.size() >= 2)
        pretrain_multiclass(train, config, model);
    else
        pretrain_energy_only(train, config, model);
    return model;
}

double classifier_cross_entropy(const Dataset& data, const FrozenModel& model) {
    if (data.empty()) throw std::invalid_argument("classifier_cross_entropy: empty dataset");
    double total = 0.0;
    for (const auto& lg : data.graphs) {
        EmbeddedGraph eg = encode(lg.graph, model.encoder);
        Matrix logits = matmul(readout_embedding(eg, model.readout), model.classifier);
        double m = logits(0, 0);
        for (std::size_t j = 1; j < logits.cols(); ++j) m = std::max(m, logits(0, j));
        double acc = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) acc += std::exp(logits(0, j) - m);
        total += m + std::log(acc) - logits(0, static_cast<std::size_t>(lg.class_label));
    }
    return total / static_cast<double>(data.size());
}

double mean_positive_energy(const Dataset& data, const FrozenModel& model, double eps_pos) {
    double total = 0.0;
    std::size_t nodes = 0;
    for (const auto& lg : data.graphs) {
        EmbeddedGraph eg = encode(lg.graph, model.encoder);
        Matrix logits = score_logits(eg.embeddings, model.head);
        for (std::size_t i = 0; i < logits.rows(); ++i) {
            double m = std::max(logits(i, 0), logits(i, 1));
            double lse = m + std::log(std::exp(logits(i, 0) - m) + std::exp(logits(i, 1) - m));
            total += softplus(-lse) + eps_pos;
        }
        nodes += logits.rows();
    }
    if (nodes == 0) throw std::invalid_argument("mean_positive_energy: no nodes");
    return total / static_cast<double>(nodes);
}

namespace {

using nlohmann::json;

std::string hex_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hex_double(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error("checkpoint: bad float literal '" + s + "'");
    return v;
}

json matrix_to_json(const Matrix& m) {
    json out;
    out["rows"] = m.rows();
    out["cols"] = m.cols();
    json data = json::array();
    for (double v : m.data()) data.push_back(hex_double(v));
    out["data"] = std::move(data);
    return out;
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const json& data = j.at("data");
    if (data.size() != m.size()) throw std::runtime_error("checkpoint: matrix size mismatch");
    for (std::size_t i = 0; i < m.size(); ++i)
        m.data()[i] = parse_hex_double(data[i].get<std::string>());
    return m;
}

}  // namespace

void save_model(const FrozenModel& model, const std::filesystem::path& path) {
    json j;
    j["format"] = "sigood-model";
    j["version"] = 1;
    j["config"] = {{"input_dim", model.encoder.input_dim},
                   {"hidden_dim", model.encoder.hidden_dim},
                   {"n_layers", model.encoder.layers.size()},
                   {"epsilon_gin", hex_double(model.encoder.epsilon_gin)},
                   {"readout", to_string(model.readout)},
                   {"n_classes", model.classifier.cols()}};
    json layers = json::array();
    for (const GinLayer& layer : model.encoder.layers)
        layers.push_back({{"w1", matrix_to_json(layer.w1)},
                          {"b1", matrix_to_json(layer.b1)},
                          {"w2", matrix_to_json(layer.w2)},
                          {"b2", matrix_to_json(layer.b2)}});
    j["encoder"] = std::move(layers);
    j["classifier"] = matrix_to_json(model.classifier);
    j["head"] = {{"w", matrix_to_json(model.head.w)}, {"b", matrix_to_json(model.head.b)}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out << j.dump(1) << "\n";
}

FrozenModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("checkpoint " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "sigood-model" || j.value("version", 0) != 1)
        throw std::runtime_error("checkpoint " + path.string() + ": unrecognized container");
    FrozenModel model;
    const json& cfg = j.at("config");
    model.encoder.input_dim = cfg.at("input_dim").get<std::size_t>();
    model.encoder.hidden_dim = cfg.at("hidden_dim").get<std::size_t>();
    model.encoder.epsilon_gin = parse_hex_double(cfg.at("epsilon_gin").get<std::string>());
    model.readout = readout_from_string(cfg.at("readout").get<std::string>());
    for (const json& layer : j.at("encoder"))
        model.encoder.layers.push_back({matrix_from_json(layer.at("w1")),
                                        matrix_from_json(layer.at("b1")),
                                        matrix_from_json(layer.at("w2")),
                                        matrix_from_json(layer.at("b2"))});
    if (model.encoder.layers.size() != cfg.at("n_layers").get<std::size_t>())
        throw std::runtime_error("checkpoint: layer count mismatch");
    model.classifier = matrix_from_json(j.at("classifier"));
    model.head.w = matrix_from_json(j.at("head").at("w"));
    model.head.b = matrix_from_json(j.at("head").at("b"));
    return model;
}

namespace {

void hash_bytes(std::uint64_t& h, const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
}

void hash_matrix(std::uint64_t& h, const Matrix& m) {
    std::uint64_t rows = m.rows(), cols = m.cols();
    hash_bytes(h, &rows, sizeof rows);
    hash_bytes(h, &cols, sizeof cols);
    for (double v : m.data()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        hash_bytes(h, &bits, sizeof bits);
    }
}

}  // namespace

std::uint64_t model_checksum(const FrozenModel& model) {
    std::uint64_t h = 14695981039346656037ull;
    for (const GinLayer& layer : model.encoder.layers) {
        hash_matrix(h, layer.w1);
        hash_matrix(h, layer.b1);
        hash_matrix(h, layer.w2);
        hash_matrix(h, layer.b2);
    }
    std::uint64_t bits;
    std::memcpy(&bits, &model.encoder.epsilon_gin, sizeof bits);
    hash_bytes(h, &bits, sizeof bits);
    hash_matrix(h, model.classifier);
    hash_matrix(h, model.head.w);
    hash_matrix(h, model.head.b);
    unsigned char readout_tag = static_cast<unsigned char>(model.readout);
    hash_bytes(h, &readout_tag, 1);
    return h;
}

}  // namespace sigood
