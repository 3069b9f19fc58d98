#include <cinttypes>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sigood/config.hpp"
#include "sigood/csv.hpp"
#include "sigood/dataio.hpp"
#include "sigood/detector.hpp"
#include "sigood/eval.hpp"
#include "sigood/gnn.hpp"
#include "sigood/verify.hpp"

namespace {

using nlohmann::json;

// Shared config document shape for synth/train/detect: optional sections,
// each section strict. bench uses the whole document as its config.
json load_sections(const std::string& path) {
    json doc = sigood::load_json_file(path);
    if (!doc.is_object()) throw std::runtime_error(path + ": config root must be an object");
    for (const auto& item : doc.items()) {
        if (item.key() != "synth" && item.key() != "data" && item.key() != "pretrain" &&
            item.key() != "detector") {
            throw std::runtime_error(path + ": unknown top-level key '" + item.key() + "'");
        }
    }
    return doc;
}

struct DataFlags {
    std::string dir, name;
    CLI::Option* dir_opt = nullptr;
    CLI::Option* name_opt = nullptr;

    void attach(CLI::App* cmd) {
        dir_opt = cmd->add_option("--data-dir", dir, "Directory holding a TU-format dataset");
        name_opt = cmd->add_option("--data-name", name, "TU dataset name (file prefix)");
    }

    sigood::Dataset resolve(const json& sections) const {
        if (dir_opt->count() || name_opt->count()) {
            if (dir.empty() || name.empty()) {
                throw std::runtime_error("--data-dir and --data-name must be given together");
            }
            return sigood::parse_tu_dataset(dir, name);
        }
        if (sections.contains("data")) {
            const sigood::DataSourceSpec src =
                sigood::data_source_from_json(sections.at("data"));
            if (src.kind == sigood::DataSourceSpec::Kind::tu) {
                return sigood::parse_tu_dataset(src.tu_directory, src.tu_name);
            }
            return sigood::synth_dataset(src.synth);
        }
        throw std::runtime_error(
            "no dataset given: pass --data-dir/--data-name or a config with a 'data' section");
    }
};

std::string checksum_hex(std::uint64_t sum) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, sum);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Test-time graph out-of-distribution detection"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset in TU text format");
    std::string sy_config, sy_out, sy_name = "SYNTH", sy_family, sy_motif;
    sigood::SynthSpec sy_defaults;
    std::size_t sy_n = 0, sy_nmin = 0, sy_nmax = 0;
    double sy_p = 0.0, sy_std = 0.0;
    std::vector<double> sy_mean;
    std::uint64_t sy_seed = 0;
    synth->add_option("--config", sy_config, "JSON config with a 'synth' section");
    synth->add_option("--out-dir", sy_out, "Output directory")->required();
    synth->add_option("--name", sy_name, "Dataset name (file prefix)");
    auto* sy_family_o = synth->add_option("--family", sy_family,
                                          "er-feature-shift | motif-shift | density-shift");
    auto* sy_n_o = synth->add_option("--n-graphs", sy_n, "Number of graphs");
    auto* sy_nmin_o = synth->add_option("--nodes-min", sy_nmin, "Minimum nodes per graph");
    auto* sy_nmax_o = synth->add_option("--nodes-max", sy_nmax, "Maximum nodes per graph");
    auto* sy_p_o = synth->add_option("--edge-prob", sy_p, "Edge probability");
    auto* sy_mean_o = synth->add_option("--feature-mean", sy_mean,
                                        "Per-dimension feature means, comma separated")
                          ->delimiter(',');
    auto* sy_std_o = synth->add_option("--feature-std", sy_std, "Feature noise scale");
    auto* sy_motif_o = synth->add_option("--motif", sy_motif, "none | triangle | star");
    auto* sy_seed_o = synth->add_option("--seed", sy_seed, "Generator seed");

    // ---- train ----
    auto* train = app.add_subcommand("train", "Pretrain a frozen encoder and scoring head");
    std::string tr_config, tr_out;
    DataFlags tr_data;
    std::uint64_t tr_seed = 0;
    train->add_option("--config", tr_config, "JSON config with 'data'/'pretrain' sections");
    tr_data.attach(train);
    train->add_option("--out", tr_out, "Checkpoint output path")->required();
    auto* tr_seed_o = train->add_option("--seed", tr_seed, "Pretraining seed");

    // ---- detect ----
    auto* detect = app.add_subcommand("detect", "Score a test set with a frozen checkpoint");
    std::string de_config, de_checkpoint, de_scores, de_trace, de_dist, de_mode, de_ablation;
    DataFlags de_data;
    double de_beta = 0.0, de_lr = 0.0, de_tau = 0.0;
    std::size_t de_iterations = 0;
    int de_depth = 0;
    std::uint64_t de_seed = 0;
    bool de_raw_dist = false;
    detect->add_option("--config", de_config, "JSON config with 'data'/'detector' sections");
    detect->add_option("--checkpoint", de_checkpoint, "Model checkpoint path")->required();
    de_data.attach(detect);
    detect->add_option("--scores", de_scores, "Scores CSV output path")->required();
    detect->add_option("--trace", de_trace, "Per-iteration trace CSV output path");
    detect->add_option("--distribution", de_dist, "Score distribution CSV output path");
    detect->add_flag("--raw-distribution", de_raw_dist,
                     "Skip min-max normalization in the distribution export");
    auto* de_beta_o = detect->add_option("--beta", de_beta, "Preference sharpness");
    auto* de_iter_o = detect->add_option("--iterations", de_iterations, "Loop iterations");
    auto* de_lr_o = detect->add_option("--lr", de_lr, "Prompt generator learning rate");
    auto* de_mode_o = detect->add_option("--mode", de_mode, "transductive | per-graph");
    auto* de_depth_o = detect->add_option("--pg-depth", de_depth, "Prompt generator depth 1-3");
    auto* de_tau_o = detect->add_option("--tau", de_tau, "Decision threshold");
    auto* de_seed_o = detect->add_option("--seed", de_seed, "Detector seed");
    auto* de_abl_o =
        detect->add_option("--ablation", de_ablation, "full | no-epo | no-pg (raw-energy)");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "Compute AUC from a labeled scores CSV");
    std::string ev_scores;
    eval->add_option("--scores", ev_scores, "Scores CSV with a label column")->required();

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "Run a full benchmark from a config file");
    std::string be_config, be_report = "report.csv", be_aggregate = "aggregate.csv";
    bool be_runtime = false;
    bench->add_option("--config", be_config, "Benchmark JSON config")->required();
    bench->add_option("--report", be_report, "Per-run report CSV path");
    bench->add_option("--aggregate", be_aggregate, "Aggregate CSV path");
    auto* be_rt_o = bench->add_flag("--measure-runtime", be_runtime,
                                    "Record wall-clock runtimes (breaks byte determinism)");

    // ---- verify ----
    auto* verify = app.add_subcommand(
        "verify", "Run gradient and derivation self-checks and print a report");
    std::uint64_t vf_seed = 7;
    std::size_t vf_grad_instances = 8, vf_deriv_instances = 10, vf_grid = 400;
    double vf_step = 1e-4, vf_tol = 1e-4;
    verify->add_option("--seed", vf_seed, "Suite seed");
    verify->add_option("--grad-instances", vf_grad_instances, "Gradient-check instances");
    verify->add_option("--derivation-instances", vf_deriv_instances,
                       "Derivation witness instances");
    verify->add_option("--grid-resolution", vf_grid, "Simplex grid resolution");
    verify->add_option("--step", vf_step, "Finite-difference step");
    verify->add_option("--tol", vf_tol, "Relative-error tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    try {
        if (app.got_subcommand(synth)) {
            json sections = sy_config.empty() ? json::object() : load_sections(sy_config);
            sigood::SynthSpec spec = sections.contains("synth")
                                         ? sigood::synth_spec_from_json(sections.at("synth"))
                                         : sy_defaults;
            if (sy_family_o->count()) spec.family = sigood::synth_family_from_string(sy_family);
            if (sy_n_o->count()) spec.n_graphs = sy_n;
            if (sy_nmin_o->count()) spec.nodes_min = sy_nmin;
            if (sy_nmax_o->count()) spec.nodes_max = sy_nmax;
            if (sy_p_o->count()) spec.edge_prob = sy_p;
            if (sy_mean_o->count()) spec.feature_mean = sy_mean;
            if (sy_std_o->count()) spec.feature_std = sy_std;
            if (sy_motif_o->count()) spec.motif = sigood::motif_from_string(sy_motif);
            if (sy_seed_o->count()) spec.seed = sy_seed;
            sigood::Dataset ds = sigood::synth_dataset(spec);
            ds.name = sy_name;
            sigood::write_tu_dataset(ds, sy_out);
            std::cout << "wrote " << ds.size() << " graphs to " << sy_out << "/" << sy_name
                      << "_*.txt\n";
            return 0;
        }

        if (app.got_subcommand(train)) {
            json sections = tr_config.empty() ? json::object() : load_sections(tr_config);
            sigood::PretrainConfig cfg =
                sections.contains("pretrain")
                    ? sigood::pretrain_config_from_json(sections.at("pretrain"))
                    : sigood::PretrainConfig{};
            if (tr_seed_o->count()) cfg.seed = tr_seed;
            const sigood::Dataset ds = tr_data.resolve(sections);
            const sigood::FrozenModel model = sigood::pretrain(ds, cfg);
            sigood::save_model(model, tr_out);
            std::cout << "trained on " << ds.size() << " graphs (feature dim "
                      << ds.feature_dim << "), checkpoint " << tr_out << "\n"
                      << "checksum " << checksum_hex(sigood::model_checksum(model)) << "\n";
            return 0;
        }

        if (app.got_subcommand(detect)) {
            json sections = de_config.empty() ? json::object() : load_sections(de_config);
            sigood::DetectorConfig cfg =
                sections.contains("detector")
                    ? sigood::detector_config_from_json(sections.at("detector"))
                    : sigood::DetectorConfig{};
            if (de_beta_o->count()) cfg.beta = de_beta;
            if (de_iter_o->count()) cfg.iterations = de_iterations;
            if (de_lr_o->count()) cfg.lr = de_lr;
            if (de_mode_o->count()) cfg.mode = sigood::detector_mode_from_string(de_mode);
            if (de_depth_o->count()) cfg.pg_depth = de_depth;
            if (de_tau_o->count()) cfg.tau = de_tau;
            if (de_seed_o->count()) cfg.seed = de_seed;
            if (de_abl_o->count()) cfg.ablation = sigood::ablation_from_string(de_ablation);
            const sigood::FrozenModel model = sigood::load_model(de_checkpoint);
            const sigood::Dataset ds = de_data.resolve(sections);
            const std::vector<sigood::DetectionResult> results =
                sigood::detect(ds, model, cfg);
            sigood::write_scores_csv(results, de_scores, cfg.seed);
            std::cout << "scored " << results.size() << " graphs -> " << de_scores << "\n";
            if (!de_trace.empty()) {
                sigood::write_trace_csv(results, de_trace);
                std::cout << "trace -> " << de_trace << "\n";
            }
            if (!de_dist.empty()) {
                sigood::write_distribution_csv(
                    sigood::export_score_distribution(results, !de_raw_dist), de_dist);
                std::cout << "distribution -> " << de_dist << "\n";
            }
            bool labeled = !results.empty();
            for (const auto& r : results) {
                if (!r.label) labeled = false;
            }
            if (labeled) {
                std::vector<double> scores;
                std::vector<int> labels;
                for (const auto& r : results) {
                    scores.push_back(r.score);
                    labels.push_back(*r.label);
                }
                std::printf("auc %.6f\n", sigood::auc(scores, labels));
            }
            return 0;
        }

        if (app.got_subcommand(eval)) {
            const std::vector<sigood::ScoredRow> rows = sigood::read_scores_csv(ev_scores);
            std::vector<double> scores;
            std::vector<int> labels;
            for (const auto& row : rows) {
                if (!row.label) {
                    throw std::runtime_error(ev_scores + ": row for graph " +
                                             std::to_string(row.graph_id) + " has no label");
                }
                scores.push_back(row.score);
                labels.push_back(*row.label);
            }
            std::printf("auc %.6f\n", sigood::auc(scores, labels));
            return 0;
        }

        if (app.got_subcommand(bench)) {
            sigood::BenchmarkConfig cfg =
                sigood::benchmark_config_from_json(sigood::load_json_file(be_config));
            if (be_rt_o->count()) cfg.measure_runtime = be_runtime;
            const sigood::BenchmarkReport report = sigood::run_benchmark(cfg);
            sigood::write_report_csv(report, be_report);
            sigood::write_aggregate_csv(report, be_aggregate);
            for (const auto& agg : report.aggregates) {
                // both orientations printed: an inverted score convention shows
                // up as flipped >> mean, not as a silent near-zero mean
                std::printf("%s %s mean_auc %.6f std %.6f (flipped %.6f)\n",
                            agg.dataset.c_str(), agg.method.c_str(), agg.mean_auc,
                            agg.std_auc, 1.0 - agg.mean_auc);
            }
            return 0;
        }

        if (app.got_subcommand(verify)) {
            bool all_ok = true;
            for (const auto& c :
                 sigood::run_grad_check_suite(vf_seed, vf_grad_instances, vf_step, vf_tol)) {
                std::printf("%s grad %-22s max_rel_err %.3e\n", c.ok ? "PASS" : "FAIL",
                            c.name.c_str(), c.max_rel_err);
                all_ok = all_ok && c.ok;
            }
            for (const auto& c :
                 sigood::run_derivation_suite(vf_seed, vf_deriv_instances, vf_grid)) {
                std::printf("%s deriv %-21s gap %.3e (bound %.3e) residual %.3e (tol %.3e)\n",
                            c.ok ? "PASS" : "FAIL", c.name.c_str(), c.max_gap, c.gap_bound,
                            c.max_reward_residual, c.residual_tol);
                all_ok = all_ok && c.ok;
            }
            if (!all_ok) {
                std::cerr << "verification failed\n";
                return 1;
            }
            std::cout << "all checks passed\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
