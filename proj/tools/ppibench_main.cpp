// ppibench: dataset ingestion, graph-aware partitioning, ER analysis,
// featurization, training and stratified evaluation for multi-label PPI
// prediction. JSON-first outputs; every subcommand writes a resolved
// config next to its artifacts so runs can be reproduced byte for byte.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ppibench/dataset.hpp"
#include "ppibench/eval.hpp"
#include "ppibench/features.hpp"
#include "ppibench/model.hpp"
#include "ppibench/partition.hpp"
#include "ppibench/randgraph.hpp"
#include "ppibench/skipgram.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ppibench;

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::cerr << "[ppibench] " << msg << '\n';
}

void write_json(const json& j, const fs::path& path, bool pretty = true) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << (pretty ? j.dump(2) : j.dump()) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

void write_resolved_config(const fs::path& out_dir, const std::string& subcommand, json config) {
    config["subcommand"] = subcommand;
    write_json(config, out_dir / (subcommand + "_config.json"));
}

fs::path prepare_out_dir(const std::string& out_dir) {
    fs::path dir(out_dir);
    fs::create_directories(dir);
    return dir;
}

// ---- schema validators: exit code 0 only when outputs check out ----

void require_keys(const json& j, std::initializer_list<const char*> keys, const std::string& what) {
    for (const char* k : keys) {
        if (!j.contains(k)) throw std::runtime_error(what + " is missing key '" + k + "'");
    }
}

void validate_dataset_json(const json& j) {
    require_keys(j, {"proteins", "edges"}, "dataset JSON");
    if (!j["proteins"].is_array() || !j["edges"].is_array()) {
        throw std::runtime_error("dataset JSON: proteins/edges must be arrays");
    }
    data::dataset_from_json(j);  // full structural validation
}

void validate_manifest_json(const json& j) {
    require_keys(j, {"scheme", "seed", "t", "test_fraction", "root_ids", "test_edge_ids", "strata"},
                 "partition manifest");
    require_keys(j["strata"], {"BS", "ES", "NS"}, "manifest strata");
}

void validate_er_report_json(const json& j) {
    require_keys(j, {"model", "test_fraction", "threshold_m", "mean_bs", "std_bs", "train_connected_rate",
                     "trials"},
                 "ER report");
}

void validate_eval_report_json(const json& j) {
    require_keys(j, {"threshold", "micro_f1", "counts", "per_type", "strata", "evaluated_edges"},
                 "eval report");
    for (const auto& name : data::kLabelNames) {
        if (!j["per_type"].contains(std::string(name))) {
            throw std::runtime_error("eval report per_type is missing '" + std::string(name) + "'");
        }
    }
}

struct DatasetBundle {
    data::Dataset dataset;
    data::PpiGraph graph;
};

DatasetBundle load_bundle(const std::string& path) {
    DatasetBundle b;
    b.dataset = data::load_dataset(path);
    b.graph = data::build_graph(b.dataset.interactions, b.dataset.proteins.size());
    return b;
}

features::AminoAcidEmbedding embedding_for_training(const data::Dataset& dataset,
                                                    const std::string& embedding_path, uint64_t seed) {
    if (!embedding_path.empty()) {
        log_info("loading embedding from " + embedding_path);
        return features::load_embedding(embedding_path);
    }
    log_info("no embedding file given; training skip-gram on dataset sequences");
    std::vector<std::string> seqs;
    for (int i = 0; i < dataset.proteins.size(); ++i) {
        if (dataset.proteins.sequence(i)) seqs.push_back(*dataset.proteins.sequence(i));
    }
    if (seqs.empty()) throw std::runtime_error("dataset has no sequences to train an embedding on");
    features::SkipGramConfig config;
    config.seed = seed;
    return features::train_skipgram(seqs, config);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-label PPI prediction pipeline"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    uint64_t seed = 42;
    app.add_option("--out-dir", out_dir, "directory for outputs")->capture_default_str();
    app.add_option("--seed", seed, "global random seed")->capture_default_str();
    app.add_option("--log-level", g_log_level, "0=quiet 1=info 2=debug")->capture_default_str();

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "parse interaction TSV (+ optional FASTA) into dataset JSON");
    std::string in_interactions, in_fasta, in_format = "row-per-type";
    ingest->add_option("--interactions", in_interactions, "interaction TSV")->required();
    ingest->add_option("--sequences", in_fasta, "FASTA file");
    ingest->add_option("--format", in_format, "row-per-type | multi-label-row")->capture_default_str();

    // ---- partition ----
    auto* part_cmd = app.add_subcommand("partition", "split a dataset into train/test edges");
    std::string part_dataset, part_scheme = "random";
    double part_fraction = 0.2;
    int part_t = 5;
    part_cmd->add_option("--dataset", part_dataset, "dataset JSON")->required();
    part_cmd->add_option("--scheme", part_scheme, "random | bfs | dfs")->capture_default_str();
    part_cmd->add_option("--fraction", part_fraction, "testset fraction")->capture_default_str();
    part_cmd->add_option("--t", part_t, "root degree threshold")->capture_default_str();

    // ---- analyze-er ----
    auto* er_cmd = app.add_subcommand("analyze-er", "random-partition strata on Erdos-Renyi graphs");
    int er_n = 0, er_trials = 20;
    double er_fraction = 0.2;
    std::optional<int64_t> er_m;
    std::optional<double> er_p;
    er_cmd->add_option("--n", er_n, "node count")->required();
    int64_t er_m_raw = -1;
    double er_p_raw = -1;
    er_cmd->add_option("--m", er_m_raw, "edge count (G(n,M))");
    er_cmd->add_option("--p", er_p_raw, "edge probability (G(n,p))");
    er_cmd->add_option("--fraction", er_fraction, "testset fraction")->capture_default_str();
    er_cmd->add_option("--trials", er_trials, "number of trials")->capture_default_str();

    // ---- featurize ----
    auto* feat_cmd = app.add_subcommand("featurize", "train the 3-mer embedding / export feature tables");
    std::string feat_dataset;
    bool feat_embedding = false, feat_matrices = false, feat_handcrafted = false;
    int feat_max_len = 2000, feat_lag = 30;
    int feat_window = 2, feat_negatives = 5, feat_epochs = 5;
    feat_cmd->add_option("--dataset", feat_dataset, "dataset JSON")->required();
    feat_cmd->add_flag("--embedding", feat_embedding, "train and write embedding.json");
    feat_cmd->add_flag("--matrices", feat_matrices, "write per-protein 13-dim matrices");
    feat_cmd->add_flag("--handcrafted", feat_handcrafted, "write AC+CTD matrix (node_features.bin)");
    feat_cmd->add_option("--max-len", feat_max_len, "truncation length")->capture_default_str();
    feat_cmd->add_option("--ac-lag", feat_lag, "AC max lag")->capture_default_str();
    feat_cmd->add_option("--window", feat_window, "skip-gram window")->capture_default_str();
    feat_cmd->add_option("--negatives", feat_negatives, "negative samples")->capture_default_str();
    feat_cmd->add_option("--epochs", feat_epochs, "skip-gram epochs")->capture_default_str();

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train the classifier on a partition");
    std::string tr_dataset, tr_manifest, tr_embedding, tr_resume, tr_graph_mode = "gca",
                tr_ablation = "full", tr_node_features;
    model::TrainConfig tr_config;
    bool tr_desk = false;
    int tr_epochs = -1;
    train_cmd->add_option("--dataset", tr_dataset, "dataset JSON")->required();
    train_cmd->add_option("--manifest", tr_manifest, "partition manifest JSON")->required();
    train_cmd->add_option("--embedding", tr_embedding, "embedding JSON (default: train on the fly)");
    train_cmd->add_option("--node-features", tr_node_features,
                          "precomputed AC+CTD matrix for ablation=pge_only");
    train_cmd->add_flag("--desk-scale", tr_desk, "small dims for fast runs");
    train_cmd->add_option("--graph-mode", tr_graph_mode, "gca | gct")->capture_default_str();
    train_cmd->add_option("--ablation", tr_ablation, "full | pie_only | pge_only")->capture_default_str();
    train_cmd->add_option("--epochs", tr_epochs, "training epochs (default 300)");
    train_cmd->add_option("--batch", tr_config.batch, "minibatch size")->capture_default_str();
    train_cmd->add_option("--lr", tr_config.lr, "learning rate")->capture_default_str();
    train_cmd->add_option("--resume", tr_resume, "checkpoint JSON to continue from");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "stratified evaluation of a checkpoint");
    std::string ev_checkpoint, ev_dataset, ev_manifest, ev_cross, ev_csv;
    double ev_threshold = 0.5;
    eval_cmd->add_option("--checkpoint", ev_checkpoint, "checkpoint JSON")->required();
    eval_cmd->add_option("--dataset", ev_dataset, "dataset JSON (the training dataset)")->required();
    eval_cmd->add_option("--manifest", ev_manifest, "partition manifest JSON")->required();
    eval_cmd->add_option("--cross-dataset", ev_cross, "second dataset JSON for cross-dataset evaluation");
    eval_cmd->add_option("--threshold", ev_threshold, "decision threshold")->capture_default_str();
    eval_cmd->add_option("--csv", ev_csv, "also write a per-(stratum,label) CSV");

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "render a JSON report for humans");
    std::string rp_input;
    bool rp_pretty = false;
    report_cmd->add_option("--input", rp_input, "report/manifest JSON")->required();
    report_cmd->add_flag("--pretty", rp_pretty, "render a text table instead of echoing JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path dir = prepare_out_dir(out_dir);

        if (*ingest) {
            auto format = in_format == "row-per-type" ? data::InteractionFormat::RowPerType
                          : in_format == "multi-label-row"
                              ? data::InteractionFormat::MultiLabelRow
                              : throw std::runtime_error("unknown --format '" + in_format + "'");
            std::ifstream tsv(in_interactions);
            if (!tsv) throw std::runtime_error("cannot open " + in_interactions);
            auto dataset = data::parse_interactions(tsv, format);

            json summary;
            int matched = 0, replaced = 0;
            if (!in_fasta.empty()) {
                std::ifstream fasta(in_fasta);
                if (!fasta) throw std::runtime_error("cannot open " + in_fasta);
                auto seqs = data::parse_sequences(fasta);
                matched = data::attach_sequences(dataset, seqs);
                replaced = seqs.replaced_chars;
            }

            auto dataset_json = data::dataset_to_json(dataset);
            validate_dataset_json(dataset_json);
            write_json(dataset_json, dir / "dataset.json");

            json histogram = json::object();
            for (const auto& name : data::kLabelNames) histogram[std::string(name)] = 0;
            for (const auto& e : dataset.interactions.edges()) {
                for (const auto& name : e.labels.names()) histogram[name] = histogram[name].get<int>() + 1;
            }
            summary = {{"proteins", dataset.proteins.size()},
                       {"edges", dataset.interactions.size()},
                       {"label_histogram", histogram},
                       {"sequences_attached", matched},
                       {"replaced_chars", replaced}};
            write_json(summary, dir / "ingest_summary.json");
            std::cout << summary.dump(2) << '\n';
            write_resolved_config(dir, "ingest",
                                  {{"interactions", in_interactions},
                                   {"sequences", in_fasta},
                                   {"format", in_format},
                                   {"seed", seed}});
        } else if (*part_cmd) {
            auto bundle = load_bundle(part_dataset);
            auto scheme = partition::scheme_from_string(part_scheme);
            if (!scheme) throw std::runtime_error("unknown --scheme '" + part_scheme + "' (random|bfs|dfs)");
            partition::PartitionConfig config;
            config.scheme = *scheme;
            config.test_fraction = part_fraction;
            config.root_degree_threshold = part_t;
            config.seed = seed;
            auto result = partition::make_partition(bundle.graph, config);

            auto manifest = partition::manifest_to_json(result);
            validate_manifest_json(manifest);
            write_json(manifest, dir / "partition.json");
            auto strata = partition::stratify(result);
            log_info("testset " + std::to_string(result.test_edges.size()) + " edges; BS/ES/NS = " +
                     std::to_string(strata.bs.size()) + "/" + std::to_string(strata.es.size()) + "/" +
                     std::to_string(strata.ns.size()));
            write_resolved_config(dir, "partition",
                                  {{"dataset", part_dataset},
                                   {"scheme", partition::to_string(*scheme)},
                                   {"fraction", part_fraction},
                                   {"t", part_t},
                                   {"seed", seed}});
        } else if (*er_cmd) {
            randgraph::ErConfig config;
            config.n = er_n;
            if (er_m_raw >= 0) config.m = er_m_raw;
            if (er_p_raw >= 0) config.p = er_p_raw;
            config.trials = er_trials;
            config.seed = seed;
            auto report = randgraph::er_strata_experiment(config, er_fraction);
            auto j = randgraph::report_to_json(report);
            validate_er_report_json(j);
            write_json(j, dir / "er_report.json");
            std::cout << j.dump(2) << '\n';
            json cfg = {{"n", er_n}, {"fraction", er_fraction}, {"trials", er_trials}, {"seed", seed}};
            if (config.m) cfg["M"] = *config.m;
            if (config.p) cfg["p"] = *config.p;
            write_resolved_config(dir, "analyze-er", cfg);
        } else if (*feat_cmd) {
            auto bundle = load_bundle(feat_dataset);
            if (!feat_embedding && !feat_matrices && !feat_handcrafted) feat_embedding = true;

            features::AminoAcidEmbedding embedding;
            if (feat_embedding || feat_matrices) {
                std::vector<std::string> seqs;
                for (int i = 0; i < bundle.dataset.proteins.size(); ++i) {
                    if (bundle.dataset.proteins.sequence(i)) {
                        seqs.push_back(*bundle.dataset.proteins.sequence(i));
                    }
                }
                features::SkipGramConfig sg;
                sg.window = feat_window;
                sg.negatives = feat_negatives;
                sg.epochs = feat_epochs;
                sg.seed = seed;
                embedding = features::train_skipgram(seqs, sg);
                features::save_embedding(embedding, (dir / "embedding.json").string());
                log_info("embedding vocabulary: " + std::to_string(embedding.e1.size()) + " 3-mers");
            }
            if (feat_matrices) {
                fs::create_directories(dir / "matrices");
                json index = json::array();
                for (int i = 0; i < bundle.dataset.proteins.size(); ++i) {
                    const auto& seq = bundle.dataset.proteins.sequence(i);
                    if (!seq) continue;
                    auto m = features::encode_protein(*seq, embedding, feat_max_len);
                    const std::string file = "matrices/" + std::to_string(i) + ".bin";
                    features::save_matrix(m, (dir / file).string());
                    index.push_back({{"index", i},
                                     {"id", bundle.dataset.proteins.id_of(i)},
                                     {"rows", m.rows},
                                     {"file", file}});
                }
                write_json(index, dir / "matrices/index.json");
            }
            if (feat_handcrafted) {
                features::ProteinMatrix table;
                table.rows = bundle.dataset.proteins.size();
                table.cols = 7 * feat_lag + features::kCtdDim;
                table.data.reserve(static_cast<size_t>(table.rows) * table.cols);
                for (int i = 0; i < bundle.dataset.proteins.size(); ++i) {
                    const auto& seq = bundle.dataset.proteins.sequence(i);
                    if (!seq) {
                        throw std::runtime_error("protein '" + bundle.dataset.proteins.id_of(i) +
                                                 "' has no sequence; cannot compute AC+CTD");
                    }
                    auto ac = features::ac_features(*seq, feat_lag);
                    auto ctd = features::ctd_features(*seq);
                    for (double v : ac) table.data.push_back(static_cast<float>(v));
                    for (double v : ctd) table.data.push_back(static_cast<float>(v));
                }
                features::save_matrix(table, (dir / "node_features.bin").string());
            }
            write_resolved_config(dir, "featurize",
                                  {{"dataset", feat_dataset},
                                   {"embedding", feat_embedding},
                                   {"matrices", feat_matrices},
                                   {"handcrafted", feat_handcrafted},
                                   {"max_len", feat_max_len},
                                   {"ac_lag", feat_lag},
                                   {"window", feat_window},
                                   {"negatives", feat_negatives},
                                   {"epochs", feat_epochs},
                                   {"seed", seed}});
        } else if (*train_cmd) {
            auto bundle = load_bundle(tr_dataset);
            auto manifest = read_json(tr_manifest);
            validate_manifest_json(manifest);
            auto part = partition::manifest_from_json(bundle.graph, manifest);

            std::optional<model::Checkpoint> resume;
            model::TrainConfig config = tr_config;
            if (!tr_resume.empty()) {
                resume = model::load_checkpoint(tr_resume);
                config = resume->model.config;  // architecture must match
                log_info("resuming from epoch " + std::to_string(resume->epoch) +
                         " (architecture flags come from the checkpoint)");
            } else {
                if (tr_desk) config.apply_desk_scale();
                auto mode = model::graph_mode_from_string(tr_graph_mode);
                if (!mode) throw std::runtime_error("unknown --graph-mode '" + tr_graph_mode + "'");
                auto ablation = model::ablation_from_string(tr_ablation);
                if (!ablation) throw std::runtime_error("unknown --ablation '" + tr_ablation + "'");
                config.graph_mode = *mode;
                config.ablation = *ablation;
                config.seed = seed;
            }
            if (tr_epochs > 0) config.epochs = tr_epochs;

            std::optional<features::AminoAcidEmbedding> embedding;
            if (config.ablation != model::Ablation::PgeOnly) {
                if (resume && resume->embedding) embedding = *resume->embedding;
                else embedding = embedding_for_training(bundle.dataset, tr_embedding, seed);
            }

            std::optional<std::vector<std::vector<double>>> override_rows;
            if (!tr_node_features.empty()) {
                auto table = features::load_matrix(tr_node_features);
                override_rows.emplace();
                for (int r = 0; r < table.rows; ++r) {
                    std::vector<double> row(table.cols);
                    for (int c = 0; c < table.cols; ++c) row[c] = table.at(r, c);
                    override_rows->push_back(std::move(row));
                }
            }

            std::ofstream log_out(dir / "train_log.jsonl",
                                  resume ? std::ios::app : std::ios::trunc);
            auto on_epoch = [&](const model::EpochStats& s) {
                json line = {{"epoch", s.epoch}, {"lr", s.lr}, {"loss", s.loss}, {"train_f1", s.train_f1}};
                log_out << line.dump() << '\n';
                if (g_log_level >= 2 || (g_log_level >= 1 && s.epoch % 50 == 0)) {
                    log_info("epoch " + std::to_string(s.epoch) + " loss " + std::to_string(s.loss) +
                             " f1 " + std::to_string(s.train_f1));
                }
            };

            auto result = model::train(bundle.dataset, bundle.graph, part,
                                       embedding ? &*embedding : nullptr, config, on_epoch,
                                       resume ? &*resume : nullptr,
                                       override_rows ? &*override_rows : nullptr);
            model::save_checkpoint(result.checkpoint, (dir / "checkpoint").string());
            log_info("best loss " + std::to_string(result.checkpoint.best_loss) + " at epoch " +
                     std::to_string(result.checkpoint.best_epoch));
            write_resolved_config(dir, "train",
                                  {{"dataset", tr_dataset},
                                   {"manifest", tr_manifest},
                                   {"embedding_file", tr_embedding},
                                   {"node_features", tr_node_features},
                                   {"resume", tr_resume},
                                   {"seed", seed},
                                   {"config", config.to_json()}});
        } else if (*eval_cmd) {
            auto checkpoint = model::load_checkpoint(ev_checkpoint);
            auto bundle = load_bundle(ev_dataset);
            auto part = partition::manifest_from_json(bundle.graph, read_json(ev_manifest));

            eval::MetricReport report;
            if (ev_cross.empty()) {
                report = eval::stratified_eval(checkpoint, bundle.dataset, bundle.graph, part, ev_threshold);
            } else {
                auto dataset_b = data::load_dataset(ev_cross);
                report = eval::cross_eval(checkpoint, bundle.dataset, part, dataset_b, ev_threshold);
            }
            auto j = eval::report_to_json(report);
            validate_eval_report_json(j);
            write_json(j, dir / "eval_report.json");
            if (!ev_csv.empty()) eval::write_report_csv(report, ev_csv);
            std::cout << j.dump(2) << '\n';
            write_resolved_config(dir, "eval",
                                  {{"checkpoint", ev_checkpoint},
                                   {"dataset", ev_dataset},
                                   {"manifest", ev_manifest},
                                   {"cross_dataset", ev_cross},
                                   {"threshold", ev_threshold},
                                   {"seed", seed}});
        } else if (*report_cmd) {
            auto j = read_json(rp_input);
            if (!rp_pretty) {
                std::cout << j.dump(2) << '\n';
                return 0;
            }
            if (j.contains("per_type")) {  // eval report
                std::printf("%-22s %8s %8s %8s %8s\n", "label", "F1", "TP", "FP", "FN");
                for (const auto& name : data::kLabelNames) {
                    const auto& s = j["per_type"][std::string(name)];
                    std::printf("%-22s %8.4f %8lld %8lld %8lld\n", std::string(name).c_str(),
                                s["f1"].get<double>(), s["tp"].get<long long>(), s["fp"].get<long long>(),
                                s["fn"].get<long long>());
                }
                std::printf("\n%-10s %10s %10s %12s\n", "stratum", "micro-F1", "edges", "proportion");
                for (const auto& [name, s] : j["strata"].items()) {
                    std::printf("%-10s %10.4f %10lld %12.4f\n", name.c_str(), s["micro_f1"].get<double>(),
                                s["edges"].get<long long>(), s["proportion"].get<double>());
                }
            } else if (j.contains("mean_bs")) {  // ER report
                std::printf("n=%d  M'=%.1f  mean BS=%.4f  std=%.4f  train connected=%.2f\n",
                            j["model"]["n"].get<int>(), j["threshold_m"].get<double>(),
                            j["mean_bs"].get<double>(), j["std_bs"].get<double>(),
                            j["train_connected_rate"].get<double>());
            } else if (j.contains("test_edge_ids")) {  // manifest
                std::printf("scheme=%s seed=%llu t=%d fraction=%.3f test_edges=%zu\n",
                            j["scheme"].get<std::string>().c_str(),
                            static_cast<unsigned long long>(j["seed"].get<uint64_t>()), j["t"].get<int>(),
                            j["test_fraction"].get<double>(), j["test_edge_ids"].size());
            } else {
                std::cout << j.dump(2) << '\n';
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
