#include "sigood/dataio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sigood/rng.hpp"

namespace sigood {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // Trailing blank lines are common in hand-edited fixtures.
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& token, const std::filesystem::path& file, std::size_t line_no) {
    const std::string t = trim(token);
    std::size_t pos = 0;
    long long value = 0;
    try {
        value = std::stoll(t, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (t.empty() || pos != t.size())
        throw std::runtime_error(file.filename().string() + ":" + std::to_string(line_no + 1) +
                                 ": non-integer token '" + token + "'");
    return value;
}

double parse_real(const std::string& token, const std::filesystem::path& file, std::size_t line_no) {
    const std::string t = trim(token);
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (t.empty() || pos != t.size())
        throw std::runtime_error(file.filename().string() + ":" + std::to_string(line_no + 1) +
                                 ": non-numeric token '" + token + "'");
    return value;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    return out;
}

std::string format_sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

std::string to_string(SynthFamily family) {
    switch (family) {
        case SynthFamily::er_feature_shift: return "er-feature-shift";
        case SynthFamily::motif_shift: return "motif-shift";
        case SynthFamily::density_shift: return "density-shift";
    }
    return "?";
}

std::string to_string(Motif motif) {
    switch (motif) {
        case Motif::none: return "none";
        case Motif::triangle: return "triangle";
        case Motif::star: return "star";
    }
    return "?";
}

SynthFamily synth_family_from_string(const std::string& s) {
    if (s == "er-feature-shift") return SynthFamily::er_feature_shift;
    if (s == "motif-shift") return SynthFamily::motif_shift;
    if (s == "density-shift") return SynthFamily::density_shift;
    throw std::invalid_argument("unknown synthetic family '" + s + "'");
}

Motif motif_from_string(const std::string& s) {
    if (s == "none") return Motif::none;
    if (s == "triangle") return Motif::triangle;
    if (s == "star") return Motif::star;
    throw std::invalid_argument("unknown motif '" + s + "'");
}

Dataset parse_tu_dataset(const std::filesystem::path& directory, const std::string& name) {
    auto file = [&](const std::string& suffix) { return directory / (name + suffix); };
    for (const char* required : {"_A.txt", "_graph_indicator.txt", "_graph_labels.txt"}) {
        if (!std::filesystem::exists(file(required)))
            throw std::runtime_error("missing mandatory file " + file(required).string());
    }

    // graph_indicator: node i (0-based) belongs to graph indicator[i]-1.
    const auto ind_path = file("_graph_indicator.txt");
    const auto ind_lines = read_lines(ind_path);
    const std::size_t total_nodes = ind_lines.size();
    std::vector<std::size_t> node_graph(total_nodes);
    std::size_t n_graphs = 0;
    for (std::size_t i = 0; i < total_nodes; ++i) {
        long long gid = parse_int(ind_lines[i], ind_path, i);
        if (gid < 1)
            throw std::runtime_error(ind_path.filename().string() + ":" + std::to_string(i + 1) +
                                     ": graph index must be >= 1");
        node_graph[i] = static_cast<std::size_t>(gid - 1);
        n_graphs = std::max(n_graphs, static_cast<std::size_t>(gid));
    }
    if (n_graphs == 0) throw std::runtime_error("empty dataset in " + ind_path.string());

    // Local node numbering within each graph, preserving file order.
    std::vector<std::size_t> local_index(total_nodes);
    std::vector<std::size_t> graph_size(n_graphs, 0);
    for (std::size_t i = 0; i < total_nodes; ++i) local_index[i] = graph_size[node_graph[i]]++;
    for (std::size_t g = 0; g < n_graphs; ++g) {
        if (graph_size[g] == 0)
            throw std::runtime_error("graph " + std::to_string(g + 1) + " has no nodes");
    }

    const auto labels_path = file("_graph_labels.txt");
    const auto label_lines = read_lines(labels_path);
    if (label_lines.size() != n_graphs)
        throw std::runtime_error(labels_path.filename().string() + ": expected " +
                                 std::to_string(n_graphs) + " labels, found " +
                                 std::to_string(label_lines.size()));
    std::vector<long long> raw_labels(n_graphs);
    std::set<long long> distinct_labels;
    for (std::size_t g = 0; g < n_graphs; ++g) {
        raw_labels[g] = parse_int(label_lines[g], labels_path, g);
        distinct_labels.insert(raw_labels[g]);
    }
    // Class labels are remapped to dense 0..C-1 by sorted raw value.
    std::map<long long, int> label_map;
    int next = 0;
    for (long long v : distinct_labels) label_map[v] = next++;

    // Edges, 1-based comma pairs.
    const auto a_path = file("_A.txt");
    const auto a_lines = read_lines(a_path);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges(n_graphs);
    for (std::size_t i = 0; i < a_lines.size(); ++i) {
        if (trim(a_lines[i]).empty()) continue;
        auto parts = split_commas(a_lines[i]);
        if (parts.size() != 2)
            throw std::runtime_error(a_path.filename().string() + ":" + std::to_string(i + 1) +
                                     ": expected 'u, v'");
        long long u1 = parse_int(parts[0], a_path, i);
        long long v1 = parse_int(parts[1], a_path, i);
        if (u1 < 1 || v1 < 1 || static_cast<std::size_t>(u1) > total_nodes ||
            static_cast<std::size_t>(v1) > total_nodes)
            throw std::runtime_error(a_path.filename().string() + ":" + std::to_string(i + 1) +
                                     ": node index out of range");
        std::size_t u = static_cast<std::size_t>(u1 - 1);
        std::size_t v = static_cast<std::size_t>(v1 - 1);
        if (node_graph[u] != node_graph[v])
            throw std::runtime_error(a_path.filename().string() + ":" + std::to_string(i + 1) +
                                     ": edge crossing graph boundary (" + std::to_string(u1) +
                                     "," + std::to_string(v1) + ")");
        if (u == v)
            throw std::runtime_error(a_path.filename().string() + ":" + std::to_string(i + 1) +
                                     ": self-loop on node " + std::to_string(u1));
        edges[node_graph[u]].emplace_back(local_index[u], local_index[v]);
    }

    // Optional node features.
    std::vector<int> node_label_onehot;  // per node, index into one-hot block
    std::size_t onehot_dim = 0;
    if (std::filesystem::exists(file("_node_labels.txt"))) {
        const auto nl_path = file("_node_labels.txt");
        const auto nl_lines = read_lines(nl_path);
        if (nl_lines.size() != total_nodes)
            throw std::runtime_error(nl_path.filename().string() + ": expected " +
                                     std::to_string(total_nodes) + " lines");
        std::vector<long long> raw(total_nodes);
        std::set<long long> distinct;
        for (std::size_t i = 0; i < total_nodes; ++i) {
            raw[i] = parse_int(nl_lines[i], nl_path, i);
            distinct.insert(raw[i]);
        }
        std::map<long long, int> m;
        int k = 0;
        for (long long v : distinct) m[v] = k++;
        node_label_onehot.resize(total_nodes);
        for (std::size_t i = 0; i < total_nodes; ++i) node_label_onehot[i] = m[raw[i]];
        onehot_dim = distinct.size();
    }

    std::vector<std::vector<double>> node_attrs;
    std::size_t attr_dim = 0;
    if (std::filesystem::exists(file("_node_attributes.txt"))) {
        const auto na_path = file("_node_attributes.txt");
        const auto na_lines = read_lines(na_path);
        if (na_lines.size() != total_nodes)
            throw std::runtime_error(na_path.filename().string() + ": expected " +
                                     std::to_string(total_nodes) + " lines");
        node_attrs.resize(total_nodes);
        for (std::size_t i = 0; i < total_nodes; ++i) {
            auto parts = split_commas(na_lines[i]);
            for (const auto& p : parts) node_attrs[i].push_back(parse_real(p, na_path, i));
            if (i == 0)
                attr_dim = node_attrs[0].size();
            else if (node_attrs[i].size() != attr_dim)
                throw std::runtime_error(na_path.filename().string() + ":" + std::to_string(i + 1) +
                                         ": inconsistent attribute count");
        }
        if (attr_dim == 0)
            throw std::runtime_error(na_path.filename().string() + ": empty attribute rows");
    }

    std::size_t d = onehot_dim + attr_dim;
    if (d == 0) {
        // No feature files: constant scalar feature so encoders have input.
        d = 1;
    }

    // Optional distribution labels (artifact extension).
    std::vector<int> dist_labels;
    if (std::filesystem::exists(file("_dist_labels.txt"))) {
        const auto dl_path = file("_dist_labels.txt");
        const auto dl_lines = read_lines(dl_path);
        if (dl_lines.size() != n_graphs)
            throw std::runtime_error(dl_path.filename().string() + ": expected " +
                                     std::to_string(n_graphs) + " lines");
        for (std::size_t g = 0; g < n_graphs; ++g) {
            long long v = parse_int(dl_lines[g], dl_path, g);
            if (v != 0 && v != 1)
                throw std::runtime_error(dl_path.filename().string() + ":" + std::to_string(g + 1) +
                                         ": distribution label must be 0 or 1");
            dist_labels.push_back(static_cast<int>(v));
        }
    }

    Dataset ds;
    ds.name = name;
    ds.feature_dim = d;
    std::vector<std::vector<std::size_t>> graph_nodes(n_graphs);
    for (std::size_t i = 0; i < total_nodes; ++i) graph_nodes[node_graph[i]].push_back(i);
    for (std::size_t g = 0; g < n_graphs; ++g) {
        const std::size_t n = graph_size[g];
        Matrix features(n, d);
        for (std::size_t local = 0; local < n; ++local) {
            std::size_t global = graph_nodes[g][local];
            std::size_t col = 0;
            if (onehot_dim > 0) {
                features(local, static_cast<std::size_t>(node_label_onehot[global])) = 1.0;
                col = onehot_dim;
            }
            if (attr_dim > 0) {
                for (std::size_t j = 0; j < attr_dim; ++j)
                    features(local, col + j) = node_attrs[global][j];
            }
            if (onehot_dim + attr_dim == 0) features(local, 0) = 1.0;
        }
        LabeledGraph lg;
        lg.graph = build_graph(n, edges[g], std::move(features));
        lg.class_label = label_map[raw_labels[g]];
        if (!dist_labels.empty()) lg.dist_label = dist_labels[g];
        ds.graphs.push_back(std::move(lg));
    }
    return ds;
}

void write_tu_dataset(const Dataset& dataset, const std::filesystem::path& directory) {
    if (dataset.empty()) throw std::invalid_argument("write_tu_dataset: empty dataset");
    std::size_t with_dist = 0;
    for (const auto& lg : dataset.graphs)
        if (lg.dist_label) ++with_dist;
    if (with_dist != 0 && with_dist != dataset.size())
        throw std::invalid_argument(
            "write_tu_dataset: distribution labels must be present on all graphs or none");

    std::filesystem::create_directories(directory);
    auto open = [&](const std::string& suffix) {
        std::ofstream out(directory / (dataset.name + suffix));
        if (!out) throw std::runtime_error("cannot write " + (directory / (dataset.name + suffix)).string());
        return out;
    };

    auto a_out = open("_A.txt");
    auto ind_out = open("_graph_indicator.txt");
    auto gl_out = open("_graph_labels.txt");
    auto na_out = open("_node_attributes.txt");

    std::size_t offset = 1;  // 1-based global node ids
    for (std::size_t g = 0; g < dataset.size(); ++g) {
        const Graph& graph = dataset.graphs[g].graph;
        gl_out << dataset.graphs[g].class_label << "\n";
        for (std::size_t i = 0; i < graph.node_count; ++i) {
            ind_out << (g + 1) << "\n";
            for (std::size_t j = 0; j < graph.feature_dim(); ++j) {
                if (j) na_out << ", ";
                na_out << format_sig9(graph.features(i, j));
            }
            na_out << "\n";
            // Both directions, row-major over the adjacency.
            for (std::size_t j = 0; j < graph.node_count; ++j) {
                if (graph.adjacency(i, j) != 0.0)
                    a_out << (offset + i) << ", " << (offset + j) << "\n";
            }
        }
        offset += graph.node_count;
    }

    if (with_dist == dataset.size()) {
        auto dl_out = open("_dist_labels.txt");
        for (const auto& lg : dataset.graphs) dl_out << *lg.dist_label << "\n";
    }
}

Dataset synth_dataset(const SynthSpec& spec) {
    if (spec.n_graphs == 0) throw std::invalid_argument("synth_dataset: n_graphs must be positive");
    if (spec.nodes_min == 0 || spec.nodes_min > spec.nodes_max)
        throw std::invalid_argument("synth_dataset: need 1 <= nodes_min <= nodes_max");
    if (!(spec.edge_prob > 0.0 && spec.edge_prob < 1.0))
        throw std::invalid_argument("synth_dataset: edge_prob must lie in (0,1)");
    if (spec.feature_mean.empty())
        throw std::invalid_argument("synth_dataset: feature_mean must be non-empty");
    if (spec.feature_std < 0.0)
        throw std::invalid_argument("synth_dataset: feature_std must be >= 0");
    if (spec.motif != Motif::none && spec.nodes_min < 3)
        throw std::invalid_argument("synth_dataset: motifs need at least 3 nodes per graph");

    const std::size_t d = spec.feature_mean.size();
    Rng rng(spec.seed);
    Dataset ds;
    ds.name = to_string(spec.family);
    ds.feature_dim = d;
    for (std::size_t g = 0; g < spec.n_graphs; ++g) {
        const std::size_t n =
            spec.nodes_min + static_cast<std::size_t>(rng.bounded(spec.nodes_max - spec.nodes_min + 1));
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.uniform() < spec.edge_prob) edges.emplace_back(i, j);

        if (spec.motif != Motif::none) {
            const std::size_t hi = std::min<std::size_t>(5, n);
            const std::size_t k = 3 + static_cast<std::size_t>(rng.bounded(hi - 3 + 1));
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order);
            if (spec.motif == Motif::triangle) {
                for (std::size_t a = 0; a < k; ++a)
                    for (std::size_t b = a + 1; b < k; ++b) edges.emplace_back(order[a], order[b]);
            } else {  // star: first selected node is the hub
                for (std::size_t b = 1; b < k; ++b) edges.emplace_back(order[0], order[b]);
            }
        }

        Matrix features(n, d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                features(i, j) = spec.feature_mean[j] + spec.feature_std * rng.normal();

        LabeledGraph lg;
        lg.graph = build_graph(n, std::move(edges), std::move(features));
        lg.class_label = 0;
        ds.graphs.push_back(std::move(lg));
    }
    return ds;
}

Dataset mix_test_set(const Dataset& id, const Dataset& ood, std::uint64_t seed) {
    if (id.empty() || ood.empty()) throw std::invalid_argument("mix_test_set: empty input dataset");
    if (id.feature_dim != ood.feature_dim)
        throw std::invalid_argument("mix_test_set: feature_dim mismatch (" +
                                    std::to_string(id.feature_dim) + " vs " +
                                    std::to_string(ood.feature_dim) + ")");
    const std::size_t k = std::min(id.size(), ood.size());
    Dataset out;
    out.feature_dim = id.feature_dim;
    out.name = id.name + "+" + ood.name;
    out.graphs.reserve(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        LabeledGraph lg = id.graphs[i];
        lg.dist_label = 0;
        out.graphs.push_back(std::move(lg));
    }
    for (std::size_t i = 0; i < k; ++i) {
        LabeledGraph lg = ood.graphs[i];
        lg.dist_label = 1;
        out.graphs.push_back(std::move(lg));
    }
    Rng rng(seed);
    rng.shuffle(out.graphs);
    return out;
}

std::pair<Dataset, Dataset> anomaly_split(const Dataset& dataset, std::uint64_t seed) {
    std::map<int, std::size_t> counts;
    for (const auto& lg : dataset.graphs) ++counts[lg.class_label];
    if (counts.size() < 2)
        throw std::invalid_argument("anomaly_split: need at least 2 classes, found " +
                                    std::to_string(counts.size()));
    // Minority class = anomaly; ties break toward the lower class index
    // (map iteration is ascending, strict < keeps the first minimum).
    int anomaly_class = counts.begin()->first;
    std::size_t best = counts.begin()->second;
    for (const auto& [label, count] : counts) {
        if (count < best) {
            best = count;
            anomaly_class = label;
        }
    }

    std::vector<std::size_t> normals, anomalies;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset.graphs[i].class_label == anomaly_class)
            anomalies.push_back(i);
        else
            normals.push_back(i);
    }
    Rng rng(seed);
    rng.shuffle(normals);
    const std::size_t n_train = normals.size() * 8 / 10;

    Dataset train, test;
    train.feature_dim = test.feature_dim = dataset.feature_dim;
    train.name = dataset.name + "-train";
    test.name = dataset.name + "-test";
    for (std::size_t i = 0; i < normals.size(); ++i) {
        LabeledGraph lg = dataset.graphs[normals[i]];
        if (i < n_train) {
            lg.dist_label.reset();
            train.graphs.push_back(std::move(lg));
        } else {
            lg.dist_label = 0;
            test.graphs.push_back(std::move(lg));
        }
    }
    for (std::size_t idx : anomalies) {
        LabeledGraph lg = dataset.graphs[idx];
        lg.dist_label = 1;
        test.graphs.push_back(std::move(lg));
    }
    return {std::move(train), std::move(test)};
}

}  // namespace sigood
