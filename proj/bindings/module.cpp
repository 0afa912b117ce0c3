#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "ppibench/dataset.hpp"
#include "ppibench/eval.hpp"
#include "ppibench/features.hpp"
#include "ppibench/model.hpp"
#include "ppibench/partition.hpp"
#include "ppibench/randgraph.hpp"
#include "ppibench/skipgram.hpp"

namespace py = pybind11;
using namespace ppibench;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    py::module_ json_mod = py::module_::import("json");
    return json_mod.attr("loads")(j.dump());
}

data::LabelSet labels_from_names(const std::vector<std::string>& names) {
    data::LabelSet s;
    for (const auto& name : names) {
        auto idx = data::label_index(name);
        if (!idx) throw std::runtime_error("unknown label '" + name + "'");
        s.set(*idx);
    }
    return s;
}

std::vector<data::LabelSet> labels_from_bits(const std::vector<std::vector<int>>& rows) {
    std::vector<data::LabelSet> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != data::kLabelCount) {
            throw std::runtime_error("label rows must have 7 entries");
        }
        data::LabelSet s;
        for (int k = 0; k < data::kLabelCount; ++k) {
            if (row[k]) s.set(k);
        }
        out.push_back(s);
    }
    return out;
}

eval::Probs probs_from_rows(const std::vector<std::vector<double>>& rows) {
    eval::Probs out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != data::kLabelCount) {
            throw std::runtime_error("probability rows must have 7 entries");
        }
        std::array<double, data::kLabelCount> a{};
        std::copy(row.begin(), row.end(), a.begin());
        out.push_back(a);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "multi-label PPI prediction pipeline (C++ core)";

    m.attr("LABEL_NAMES") = std::vector<std::string>(data::kLabelNames.begin(), data::kLabelNames.end());

    py::class_<data::Dataset>(m, "Dataset")
        .def_property_readonly("num_proteins", [](const data::Dataset& d) { return d.proteins.size(); })
        .def_property_readonly("num_edges", [](const data::Dataset& d) { return d.interactions.size(); })
        .def("protein_id", [](const data::Dataset& d, int i) { return d.proteins.id_of(i); })
        .def("sequence",
             [](const data::Dataset& d, int i) -> py::object {
                 const auto& s = d.proteins.sequence(i);
                 return s ? py::cast(*s) : py::none();
             })
        .def("edges", [](const data::Dataset& d) {
            std::vector<std::tuple<int, int, std::vector<std::string>>> out;
            for (const auto& e : d.interactions.edges()) out.emplace_back(e.a, e.b, e.labels.names());
            return out;
        });

    m.def("parse_interactions",
          [](const std::string& text, const std::string& format) {
              auto fmt = format == "row-per-type"       ? data::InteractionFormat::RowPerType
                         : format == "multi-label-row" ? data::InteractionFormat::MultiLabelRow
                                                        : throw std::runtime_error("unknown format");
              return data::parse_interactions(text, fmt);
          },
          py::arg("text"), py::arg("format") = "row-per-type");
    m.def("parse_sequences", [](const std::string& text) {
        auto seqs = data::parse_sequences(text);
        py::dict out;
        for (const auto& [id, seq] : seqs.records) out[py::cast(id)] = seq;
        return py::make_tuple(out, seqs.replaced_chars);
    });
    m.def("load_dataset", &data::load_dataset, py::arg("path"));
    m.def("save_dataset", &data::save_dataset, py::arg("dataset"), py::arg("path"));
    m.def("dataset_from_edges",
          [](int n, const std::vector<std::tuple<int, int, std::vector<std::string>>>& edges) {
              data::Dataset d;
              for (int i = 0; i < n; ++i) d.proteins.add("P" + std::to_string(i));
              for (const auto& [a, b, names] : edges) d.interactions.add(a, b, labels_from_names(names));
              return d;
          },
          py::arg("num_proteins"), py::arg("edges"));

    // partitioning
    m.def("make_partition",
          [](const data::Dataset& dataset, const std::string& scheme, double fraction, int t,
             uint64_t seed) {
              auto graph = data::build_graph(dataset.interactions, dataset.proteins.size());
              auto sch = partition::scheme_from_string(scheme);
              if (!sch) throw std::runtime_error("unknown scheme '" + scheme + "'");
              partition::PartitionConfig config;
              config.scheme = *sch;
              config.test_fraction = fraction;
              config.root_degree_threshold = t;
              config.seed = seed;
              auto result = partition::make_partition(graph, config);
              return json_to_py(partition::manifest_to_json(result));
          },
          py::arg("dataset"), py::arg("scheme") = "random", py::arg("fraction") = 0.2, py::arg("t") = 5,
          py::arg("seed") = 0);

    // random graphs
    m.def("connectivity_threshold", &randgraph::connectivity_threshold, py::arg("n"));
    m.def("gnm_is_connected",
          [](int n, int64_t m, uint64_t seed) {
              Rng rng(seed);
              return randgraph::is_connected(randgraph::gen_gnm(n, m, rng));
          },
          py::arg("n"), py::arg("m"), py::arg("seed") = 0);
    m.def("analyze_er",
          [](int n, int64_t m, double fraction, int trials, uint64_t seed) {
              randgraph::ErConfig config;
              config.n = n;
              config.m = m;
              config.trials = trials;
              config.seed = seed;
              return json_to_py(randgraph::report_to_json(randgraph::er_strata_experiment(config, fraction)));
          },
          py::arg("n"), py::arg("m"), py::arg("fraction") = 0.2, py::arg("trials") = 20,
          py::arg("seed") = 0);

    // features
    m.def("aa_class", [](const std::string& residue) {
        if (residue.size() != 1) throw std::runtime_error("expected a single residue");
        return features::aa_class(residue[0]);
    });
    m.def("ctd_features", [](const std::string& seq) { return features::ctd_features(seq); });
    m.def("ac_features",
          [](const std::string& seq, int lag_max) { return features::ac_features(seq, lag_max); },
          py::arg("sequence"), py::arg("lag_max") = 30);
    m.def("train_skipgram",
          [](const std::vector<std::string>& sequences, int window, int negatives, int epochs,
             uint64_t seed) {
              features::SkipGramConfig config;
              config.window = window;
              config.negatives = negatives;
              config.epochs = epochs;
              config.seed = seed;
              auto emb = features::train_skipgram(sequences, config);
              py::dict out;
              for (const auto& [token, vec] : emb.e1) {
                  out[py::cast(token)] = std::vector<float>(vec.begin(), vec.end());
              }
              return out;
          },
          py::arg("sequences"), py::arg("window") = 2, py::arg("negatives") = 5, py::arg("epochs") = 5,
          py::arg("seed") = 1);
    m.def("encode_protein",
          [](const std::string& seq, const std::map<std::string, std::vector<float>>& table, int max_len) {
              features::AminoAcidEmbedding emb;
              for (const auto& [token, vec] : table) {
                  if (vec.size() != features::kE1Dim) throw std::runtime_error("e1 vectors must be 5-dim");
                  std::array<float, features::kE1Dim> a{};
                  std::copy(vec.begin(), vec.end(), a.begin());
                  emb.e1.emplace(token, a);
              }
              auto m2 = features::encode_protein(seq, emb, max_len);
              std::vector<std::vector<float>> rows(m2.rows, std::vector<float>(m2.cols));
              for (int r = 0; r < m2.rows; ++r) {
                  for (int c = 0; c < m2.cols; ++c) rows[r][c] = m2.at(r, c);
              }
              return rows;
          },
          py::arg("sequence"), py::arg("embedding"), py::arg("max_len") = 2000);

    // metrics
    m.def("micro_f1",
          [](const std::vector<std::vector<double>>& probs, const std::vector<std::vector<int>>& labels,
             double threshold) {
              return eval::micro_f1(probs_from_rows(probs), labels_from_bits(labels), threshold);
          },
          py::arg("predictions"), py::arg("labels"), py::arg("threshold") = 0.5);
    m.def("per_type_f1",
          [](const std::vector<std::vector<double>>& probs, const std::vector<std::vector<int>>& labels,
             double threshold) {
              auto scores = eval::per_type_f1(probs_from_rows(probs), labels_from_bits(labels), threshold);
              py::dict out;
              for (int k = 0; k < data::kLabelCount; ++k) {
                  out[py::cast(std::string(data::kLabelNames[k]))] = scores[k].f1;
              }
              return out;
          },
          py::arg("predictions"), py::arg("labels"), py::arg("threshold") = 0.5);

    // pipeline entry points (path based, mirroring the CLI)
    m.def("train_model",
          [](const std::string& dataset_path, const std::string& manifest_path,
             const std::string& checkpoint_prefix, bool desk_scale, int epochs,
             const std::string& graph_mode, const std::string& ablation, uint64_t seed) {
              auto dataset = data::load_dataset(dataset_path);
              auto graph = data::build_graph(dataset.interactions, dataset.proteins.size());
              auto part = partition::load_manifest(graph, manifest_path);
              model::TrainConfig config;
              if (desk_scale) config.apply_desk_scale();
              if (epochs > 0) config.epochs = epochs;
              auto mode = model::graph_mode_from_string(graph_mode);
              auto abl = model::ablation_from_string(ablation);
              if (!mode || !abl) throw std::runtime_error("bad graph_mode/ablation");
              config.graph_mode = *mode;
              config.ablation = *abl;
              config.seed = seed;

              std::optional<features::AminoAcidEmbedding> embedding;
              if (config.ablation != model::Ablation::PgeOnly) {
                  std::vector<std::string> seqs;
                  for (int i = 0; i < dataset.proteins.size(); ++i) {
                      if (dataset.proteins.sequence(i)) seqs.push_back(*dataset.proteins.sequence(i));
                  }
                  features::SkipGramConfig sg;
                  sg.seed = seed;
                  embedding = features::train_skipgram(seqs, sg);
              }
              auto result = model::train(dataset, graph, part, embedding ? &*embedding : nullptr, config);
              model::save_checkpoint(result.checkpoint, checkpoint_prefix);
              py::list history;
              for (const auto& s : result.history) {
                  py::dict d;
                  d["epoch"] = s.epoch;
                  d["loss"] = s.loss;
                  d["train_f1"] = s.train_f1;
                  d["lr"] = s.lr;
                  history.append(d);
              }
              return history;
          },
          py::arg("dataset_path"), py::arg("manifest_path"), py::arg("checkpoint_prefix"),
          py::arg("desk_scale") = true, py::arg("epochs") = -1, py::arg("graph_mode") = "gca",
          py::arg("ablation") = "full", py::arg("seed") = 1);
    m.def("evaluate_model",
          [](const std::string& checkpoint_json, const std::string& dataset_path,
             const std::string& manifest_path, double threshold) {
              auto checkpoint = model::load_checkpoint(checkpoint_json);
              auto dataset = data::load_dataset(dataset_path);
              auto graph = data::build_graph(dataset.interactions, dataset.proteins.size());
              auto part = partition::load_manifest(graph, manifest_path);
              auto report = eval::stratified_eval(checkpoint, dataset, graph, part, threshold);
              return json_to_py(eval::report_to_json(report));
          },
          py::arg("checkpoint_json"), py::arg("dataset_path"), py::arg("manifest_path"),
          py::arg("threshold") = 0.5);
}
