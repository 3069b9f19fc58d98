#include "sigood/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sigood {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps line endings stable
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

void write_scores_csv(const std::vector<DetectionResult>& results, const std::string& path,
                      std::optional<std::uint64_t> seed) {
    bool all_labeled = !results.empty();
    for (const auto& r : results) {
        if (!r.label) all_labeled = false;
    }
    auto out = open_out(path);
    if (seed) out << "# seed: " << *seed << "\n";
    out << (all_labeled ? "graph_id,score,decision,label" : "graph_id,score,decision") << "\n";
    for (const auto& r : results) {
        out << r.graph_id << "," << fmt_full(r.score) << "," << (r.is_ood ? "OOD" : "ID");
        if (all_labeled) out << "," << *r.label;
        out << "\n";
    }
}

void write_trace_csv(const std::vector<DetectionResult>& results, const std::string& path) {
    auto out = open_out(path);
    out << "graph_id,iteration,loss,n_ood,n_id,fallback\n";
    for (const auto& r : results) {
        for (std::size_t i = 0; i < r.trace.size(); ++i) {
            const auto& rec = r.trace[i];
            out << r.graph_id << "," << (i + 1) << "," << fmt_full(rec.loss) << ","
                << rec.n_ood << "," << rec.n_id << "," << (rec.fallback ? 1 : 0) << "\n";
        }
    }
}

void write_report_csv(const BenchmarkReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "# reference auc from the method's published evaluation, not reproduced at desk scale:\n";
    out << "#   BZR->COX2 87.36, AIDS->DHFR 97.38\n";
    out << "dataset,method,seed,auc,runtime_s\n";
    for (const auto& row : report.rows) {
        out << row.dataset << "," << row.method << "," << row.seed << ","
            << fmt_fixed6(row.auc) << "," << fmt_fixed6(row.runtime_s) << "\n";
    }
}

void write_aggregate_csv(const BenchmarkReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "dataset,method,mean_auc,std_auc\n";
    for (const auto& row : report.aggregates) {
        out << row.dataset << "," << row.method << "," << fmt_fixed6(row.mean_auc) << ","
            << fmt_fixed6(row.std_auc) << "\n";
    }
}

void write_distribution_csv(const std::vector<ScoreDistributionRow>& rows,
                            const std::string& path) {
    auto out = open_out(path);
    out << "graph_id,score,label\n";
    for (const auto& row : rows) {
        out << row.graph_id << "," << fmt_full(row.score) << ",";
        if (row.label) out << *row.label;
        out << "\n";
    }
}

std::vector<ScoredRow> read_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scores csv: " + path);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw std::runtime_error("scores csv has no header: " + path);
    std::size_t id_col = header.size(), score_col = header.size(), label_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "graph_id") id_col = i;
        if (header[i] == "score") score_col = i;
        if (header[i] == "label") label_col = i;
    }
    if (id_col == header.size() || score_col == header.size()) {
        throw std::runtime_error("scores csv missing graph_id/score columns: " + path);
    }
    std::vector<ScoredRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < header.size()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": short row");
        }
        ScoredRow row;
        try {
            row.graph_id = static_cast<std::size_t>(std::stoull(fields[id_col]));
            row.score = std::stod(fields[score_col]);
            if (label_col < fields.size() && !fields[label_col].empty()) {
                row.label = std::stoi(fields[label_col]);
            }
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad numeric field");
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sigood
