#include "sigood/config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>

namespace sigood {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const char* context,
                         std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw std::invalid_argument(std::string(context) + ": expected an object");
    }
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw std::invalid_argument(std::string(context) + ": unknown key '" + item.key() +
                                        "'");
        }
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void read_string_field(const json& j, const char* key, std::string& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<std::string>();
}

}  // namespace

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

SynthSpec synth_spec_from_json(const json& j) {
    reject_unknown_keys(j, "synth spec",
                        {"family", "n_graphs", "nodes_min", "nodes_max", "edge_prob",
                         "feature_mean", "feature_std", "motif", "seed"});
    SynthSpec spec;
    std::string family;
    read_string_field(j, "family", family);
    if (!family.empty()) spec.family = synth_family_from_string(family);
    read_field(j, "n_graphs", spec.n_graphs);
    read_field(j, "nodes_min", spec.nodes_min);
    read_field(j, "nodes_max", spec.nodes_max);
    read_field(j, "edge_prob", spec.edge_prob);
    read_field(j, "feature_mean", spec.feature_mean);
    read_field(j, "feature_std", spec.feature_std);
    std::string motif;
    read_string_field(j, "motif", motif);
    if (!motif.empty()) spec.motif = motif_from_string(motif);
    read_field(j, "seed", spec.seed);
    return spec;
}

PretrainConfig pretrain_config_from_json(const json& j) {
    reject_unknown_keys(j, "pretrain config",
                        {"epochs", "lr", "hidden_dim", "n_layers", "seed", "energy_margin",
                         "margin_weight", "negative_margin", "negative_noise_std",
                         "train_scoring_head", "readout"});
    PretrainConfig cfg;
    read_field(j, "epochs", cfg.epochs);
    read_field(j, "lr", cfg.lr);
    read_field(j, "hidden_dim", cfg.hidden_dim);
    read_field(j, "n_layers", cfg.n_layers);
    read_field(j, "seed", cfg.seed);
    read_field(j, "energy_margin", cfg.energy_margin);
    read_field(j, "margin_weight", cfg.margin_weight);
    read_field(j, "negative_margin", cfg.negative_margin);
    read_field(j, "negative_noise_std", cfg.negative_noise_std);
    read_field(j, "train_scoring_head", cfg.train_scoring_head);
    std::string readout;
    read_string_field(j, "readout", readout);
    if (!readout.empty()) cfg.readout = readout_from_string(readout);
    return cfg;
}

DetectorConfig detector_config_from_json(const json& j) {
    reject_unknown_keys(j, "detector config",
                        {"beta", "iterations", "lr", "mode", "pg_depth", "tau", "seed",
                         "ablation", "flip_score", "clamp_arg", "eps_pos", "epsilon_ln"});
    DetectorConfig cfg;
    read_field(j, "beta", cfg.beta);
    read_field(j, "iterations", cfg.iterations);
    read_field(j, "lr", cfg.lr);
    std::string mode;
    read_string_field(j, "mode", mode);
    if (!mode.empty()) cfg.mode = detector_mode_from_string(mode);
    read_field(j, "pg_depth", cfg.pg_depth);
    read_field(j, "tau", cfg.tau);
    read_field(j, "seed", cfg.seed);
    std::string ablation;
    read_string_field(j, "ablation", ablation);
    if (!ablation.empty()) cfg.ablation = ablation_from_string(ablation);
    read_field(j, "flip_score", cfg.flip_score);
    read_field(j, "clamp_arg", cfg.clamp_arg);
    read_field(j, "eps_pos", cfg.eps_pos);
    read_field(j, "epsilon_ln", cfg.epsilon_ln);
    return cfg;
}

DataSourceSpec data_source_from_json(const json& j) {
    reject_unknown_keys(j, "data source", {"kind", "synth", "tu_directory", "tu_name"});
    DataSourceSpec src;
    std::string kind = "synth";
    read_string_field(j, "kind", kind);
    if (kind == "synth") {
        src.kind = DataSourceSpec::Kind::synth;
        if (!j.contains("synth")) {
            throw std::invalid_argument("data source: kind 'synth' requires a 'synth' object");
        }
        src.synth = synth_spec_from_json(j.at("synth"));
    } else if (kind == "tu") {
        src.kind = DataSourceSpec::Kind::tu;
        read_string_field(j, "tu_directory", src.tu_directory);
        read_string_field(j, "tu_name", src.tu_name);
        if (src.tu_directory.empty() || src.tu_name.empty()) {
            throw std::invalid_argument(
                "data source: kind 'tu' requires tu_directory and tu_name");
        }
    } else {
        throw std::invalid_argument("data source: unknown kind '" + kind + "'");
    }
    return src;
}

BenchmarkConfig benchmark_config_from_json(const json& j) {
    reject_unknown_keys(j, "benchmark config",
                        {"name", "protocol", "id_train", "id_test", "ood", "anomaly_source",
                         "methods", "seeds", "pretrain", "detector", "sweep_param",
                         "sweep_values", "measure_runtime"});
    BenchmarkConfig cfg;
    read_string_field(j, "name", cfg.name);
    std::string protocol = "ood-pair";
    read_string_field(j, "protocol", protocol);
    if (protocol == "ood-pair") {
        cfg.protocol = BenchmarkConfig::Protocol::ood_pair;
        for (const char* key : {"id_train", "id_test", "ood"}) {
            if (!j.contains(key)) {
                throw std::invalid_argument(std::string("benchmark config: missing '") + key +
                                            "' for the ood-pair protocol");
            }
        }
        cfg.id_train = data_source_from_json(j.at("id_train"));
        cfg.id_test = data_source_from_json(j.at("id_test"));
        cfg.ood = data_source_from_json(j.at("ood"));
    } else if (protocol == "anomaly") {
        cfg.protocol = BenchmarkConfig::Protocol::anomaly;
        if (!j.contains("anomaly_source")) {
            throw std::invalid_argument(
                "benchmark config: missing 'anomaly_source' for the anomaly protocol");
        }
        cfg.anomaly_source = data_source_from_json(j.at("anomaly_source"));
    } else {
        throw std::invalid_argument("benchmark config: unknown protocol '" + protocol + "'");
    }
    read_field(j, "methods", cfg.methods);
    read_field(j, "seeds", cfg.seeds);
    if (j.contains("pretrain")) cfg.pretrain = pretrain_config_from_json(j.at("pretrain"));
    if (j.contains("detector")) cfg.detector = detector_config_from_json(j.at("detector"));
    read_string_field(j, "sweep_param", cfg.sweep_param);
    read_field(j, "sweep_values", cfg.sweep_values);
    read_field(j, "measure_runtime", cfg.measure_runtime);
    return cfg;
}

}  // namespace sigood
