#include "ppibench/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "ppibench/eval.hpp"

namespace ppibench::model {

std::string to_string(GraphMode mode) { return mode == GraphMode::GCA ? "gca" : "gct"; }

std::string to_string(Ablation ablation) {
    switch (ablation) {
        case Ablation::Full: return "full";
        case Ablation::PieOnly: return "pie_only";
        case Ablation::PgeOnly: return "pge_only";
    }
    return "?";
}

std::optional<GraphMode> graph_mode_from_string(std::string_view name) {
    std::string s(name);
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "gca") return GraphMode::GCA;
    if (s == "gct") return GraphMode::GCT;
    return std::nullopt;
}

std::optional<Ablation> ablation_from_string(std::string_view name) {
    std::string s(name);
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "full") return Ablation::Full;
    if (s == "pie_only") return Ablation::PieOnly;
    if (s == "pge_only") return Ablation::PgeOnly;
    return std::nullopt;
}

void TrainConfig::apply_desk_scale() {
    desk_scale = true;
    pie_dim = 32;
    pge_dim = 16;
    batch = 64;
    max_len = 256;
    conv_channels = 16;
    gru_hidden = 16;
}

nlohmann::json TrainConfig::to_json() const {
    return {{"pie_dim", pie_dim},
            {"pge_dim", pge_dim},
            {"gin_layers", gin_layers},
            {"conv_channels", conv_channels},
            {"conv_kernel", conv_kernel},
            {"pool_width", pool_width},
            {"gru_hidden", gru_hidden},
            {"max_len", max_len},
            {"lr", lr},
            {"batch", batch},
            {"epochs", epochs},
            {"lr_reduce_rate", lr_reduce_rate},
            {"lr_patience", lr_patience},
            {"weight_decay", weight_decay},
            {"decoupled_decay", decoupled_decay},
            {"graph_mode", to_string(graph_mode)},
            {"ablation", to_string(ablation)},
            {"scalar_pair_product", scalar_pair_product},
            {"ac_lag", ac_lag},
            {"seed", seed},
            {"desk_scale", desk_scale}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.pie_dim = j.at("pie_dim").get<int>();
    c.pge_dim = j.at("pge_dim").get<int>();
    c.gin_layers = j.at("gin_layers").get<int>();
    c.conv_channels = j.at("conv_channels").get<int>();
    c.conv_kernel = j.at("conv_kernel").get<int>();
    c.pool_width = j.at("pool_width").get<int>();
    c.gru_hidden = j.at("gru_hidden").get<int>();
    c.max_len = j.at("max_len").get<int>();
    c.lr = j.at("lr").get<double>();
    c.batch = j.at("batch").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.lr_reduce_rate = j.at("lr_reduce_rate").get<double>();
    c.lr_patience = j.at("lr_patience").get<int>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.decoupled_decay = j.at("decoupled_decay").get<bool>();
    c.graph_mode = *graph_mode_from_string(j.at("graph_mode").get<std::string>());
    c.ablation = *ablation_from_string(j.at("ablation").get<std::string>());
    c.scalar_pair_product = j.at("scalar_pair_product").get<bool>();
    c.ac_lag = j.at("ac_lag").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    c.desk_scale = j.at("desk_scale").get<bool>();
    return c;
}

std::vector<std::pair<std::string, tensor::Tensor>> Model::parameters() const {
    std::vector<std::pair<std::string, tensor::Tensor>> out;
    if (config.ablation != Ablation::PgeOnly) {
        out.emplace_back("conv_w", conv_w);
        out.emplace_back("conv_b", conv_b);
        gru_fw.collect(out, "gru_fw");
        gru_bw.collect(out, "gru_bw");
        out.emplace_back("fc_w", fc_w);
        out.emplace_back("fc_b", fc_b);
    }
    for (size_t k = 0; k < gin.size(); ++k) {
        const std::string prefix = "gin" + std::to_string(k);
        out.emplace_back(prefix + ".eps", gin[k].epsilon);
        out.emplace_back(prefix + ".w1", gin[k].w1);
        out.emplace_back(prefix + ".b1", gin[k].b1);
        out.emplace_back(prefix + ".w2", gin[k].w2);
        out.emplace_back(prefix + ".b2", gin[k].b2);
    }
    out.emplace_back("cls_w", cls_w);
    out.emplace_back("cls_b", cls_b);
    return out;
}

int Model::node_dim() const {
    if (config.ablation == Ablation::PieOnly) return config.pie_dim;
    return config.pge_dim;
}

Model init_model(const TrainConfig& config, int input_dim) {
    if (config.pie_dim < 1 || config.pge_dim < 1 || config.gin_layers < 1) {
        throw std::runtime_error("model dims and gin_layers must be >= 1");
    }
    Rng rng(config.seed);
    Model m;
    m.config = config;
    m.input_dim = input_dim;

    int gin_in = input_dim;
    if (config.ablation != Ablation::PgeOnly) {
        const int c = config.conv_channels, k = config.conv_kernel, h = config.gru_hidden;
        m.conv_w = tensor::Tensor::uniform_param(c, input_dim * k, input_dim * k, rng, "conv_w");
        m.conv_b = tensor::Tensor::param(1, c, std::vector<double>(c, 0.0), "conv_b");
        m.gru_fw = tensor::GruParams::init(c, h, rng, "gru_fw");
        m.gru_bw = tensor::GruParams::init(c, h, rng, "gru_bw");
        m.fc_w = tensor::Tensor::uniform_param(2 * h, config.pie_dim, 2 * h, rng, "fc_w");
        m.fc_b = tensor::Tensor::param(1, config.pie_dim, std::vector<double>(config.pie_dim, 0.0), "fc_b");
        gin_in = config.pie_dim;
    }

    if (config.ablation != Ablation::PieOnly) {
        for (int k = 0; k < config.gin_layers; ++k) {
            const int in = k == 0 ? gin_in : config.pge_dim;
            GinLayer layer;
            const std::string prefix = "gin" + std::to_string(k);
            layer.epsilon = tensor::Tensor::param(1, 1, {0.0}, prefix + ".eps");
            layer.w1 = tensor::Tensor::uniform_param(in, config.pge_dim, in, rng, prefix + ".w1");
            layer.b1 = tensor::Tensor::param(1, config.pge_dim, std::vector<double>(config.pge_dim, 0.0),
                                             prefix + ".b1");
            layer.w2 = tensor::Tensor::uniform_param(config.pge_dim, config.pge_dim, config.pge_dim, rng,
                                                     prefix + ".w2");
            layer.b2 = tensor::Tensor::param(1, config.pge_dim, std::vector<double>(config.pge_dim, 0.0),
                                             prefix + ".b2");
            m.gin.push_back(std::move(layer));
        }
    }

    const int cls_in = config.scalar_pair_product ? 1 : m.node_dim();
    m.cls_w = tensor::Tensor::uniform_param(cls_in, data::kLabelCount, cls_in, rng, "cls_w");
    m.cls_b = tensor::Tensor::param(1, data::kLabelCount, std::vector<double>(data::kLabelCount, 0.0), "cls_b");
    return m;
}

NodeInputs build_node_inputs(const data::Dataset& dataset, const features::AminoAcidEmbedding* embedding,
                             const TrainConfig& config,
                             const std::vector<std::vector<double>>* feature_override) {
    const int n = dataset.proteins.size();
    NodeInputs inputs;

    if (config.ablation == Ablation::PgeOnly) {
        const int dim = 7 * config.ac_lag + features::kCtdDim;
        std::vector<double> rows;
        rows.reserve(static_cast<size_t>(n) * dim);
        if (feature_override) {
            if (static_cast<int>(feature_override->size()) != n) {
                throw std::runtime_error("node feature override has " + std::to_string(feature_override->size()) +
                                         " rows, expected " + std::to_string(n));
            }
            for (const auto& row : *feature_override) {
                if (static_cast<int>(row.size()) != dim) {
                    throw std::runtime_error("node feature override width " + std::to_string(row.size()) +
                                             " != AC+CTD width " + std::to_string(dim));
                }
                rows.insert(rows.end(), row.begin(), row.end());
            }
        } else {
            for (int i = 0; i < n; ++i) {
                const auto& seq = dataset.proteins.sequence(i);
                if (!seq) {
                    throw std::runtime_error("protein '" + dataset.proteins.id_of(i) +
                                             "' has no sequence (needed to compute AC+CTD features)");
                }
                auto ac = features::ac_features(*seq, config.ac_lag);
                auto ctd = features::ctd_features(*seq);
                rows.insert(rows.end(), ac.begin(), ac.end());
                rows.insert(rows.end(), ctd.begin(), ctd.end());
            }
        }
        inputs.vectors = tensor::Tensor::from_rows(n, dim, std::move(rows));
        return inputs;
    }

    if (!embedding) throw std::runtime_error("amino-acid embedding required for ablation=" +
                                             to_string(config.ablation));
    inputs.matrices.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto& seq = dataset.proteins.sequence(i);
        if (!seq) {
            throw std::runtime_error("protein '" + dataset.proteins.id_of(i) +
                                     "' has no sequence (required for ablation=" + to_string(config.ablation) + ")");
        }
        auto matrix = features::encode_protein(*seq, *embedding, config.max_len);
        std::vector<double> values(matrix.data.begin(), matrix.data.end());
        inputs.matrices.push_back(
            tensor::Tensor::from_rows(matrix.rows, matrix.cols, std::move(values)));
    }
    return inputs;
}

std::vector<std::vector<int>> build_message_graph(const data::PpiGraph& graph,
                                                  const partition::PartitionResult& part, GraphMode mode) {
    std::vector<char> in_test(graph.edge_count, 0);
    if (mode == GraphMode::GCT) {
        for (int e : part.test_edges) in_test[e] = 1;
    }
    std::vector<std::vector<int>> adj(graph.n);
    for (int p = 0; p < graph.n; ++p) {
        for (const auto& [v, e] : graph.adjacency[p]) {
            if (mode == GraphMode::GCA || !in_test[e]) adj[p].push_back(v);
        }
    }
    return adj;
}

tensor::Tensor pie_encode(const tensor::Tensor& matrix, const Model& model) {
    if (matrix.rows() < 1) throw std::runtime_error("pie_encode: empty protein matrix");
    if (matrix.cols() != model.input_dim) {
        throw std::runtime_error("pie_encode: matrix width " + std::to_string(matrix.cols()) + " != " +
                                 std::to_string(model.input_dim));
    }
    auto conv = tensor::relu(tensor::conv1d(matrix, model.conv_w, model.conv_b));
    auto pooled = tensor::maxpool1d(conv, model.config.pool_width);
    auto recur = tensor::bigru(pooled, model.gru_fw, model.gru_bw);
    auto summary = tensor::mean_rows(recur);
    return tensor::linear(summary, model.fc_w, model.fc_b);
}

tensor::Tensor gin_forward(const tensor::Tensor& nodes, const std::vector<std::vector<int>>& adj,
                           const GinLayer& layer) {
    if (nodes.cols() != layer.w1.rows()) {
        throw std::runtime_error("gin_forward: feature width " + std::to_string(nodes.cols()) +
                                 " != MLP input " + std::to_string(layer.w1.rows()));
    }
    auto self_scale = tensor::add(tensor::Tensor::scalar(1.0), layer.epsilon);
    auto combined = tensor::add(tensor::scale_by(nodes, self_scale), tensor::neighbor_sum(nodes, adj));
    auto hidden = tensor::relu(tensor::linear(combined, layer.w1, layer.b1));
    return tensor::linear(hidden, layer.w2, layer.b2);
}

tensor::Tensor encode_nodes(const Model& model, const NodeInputs& inputs,
                            const std::vector<std::vector<int>>& message_adj) {
    tensor::Tensor feats;
    if (model.config.ablation == Ablation::PgeOnly) {
        feats = inputs.vectors;
    } else {
        std::vector<tensor::Tensor> rows;
        rows.reserve(inputs.matrices.size());
        for (const auto& m : inputs.matrices) rows.push_back(pie_encode(m, model));
        feats = tensor::concat_rows(rows);
    }
    for (const auto& layer : model.gin) feats = gin_forward(feats, message_adj, layer);
    return feats;
}

tensor::Tensor predict_pair(const tensor::Tensor& g_i, const tensor::Tensor& g_j, const Model& model) {
    auto prod = tensor::mul(g_i, g_j);
    if (model.config.scalar_pair_product) prod = tensor::sum_cols(prod);
    return tensor::sigmoid(tensor::linear(prod, model.cls_w, model.cls_b));
}

tensor::Tensor predict_edges(const Model& model, const tensor::Tensor& node_feats,
                             const std::vector<int>& idx_a, const std::vector<int>& idx_b) {
    if (idx_a.size() != idx_b.size()) throw std::runtime_error("predict_edges: index lists differ in length");
    auto gi = tensor::gather_rows(node_feats, idx_a);
    auto gj = tensor::gather_rows(node_feats, idx_b);
    return predict_pair(gi, gj, model);
}

tensor::Tensor bce_loss(const tensor::Tensor& probabilities, const tensor::Tensor& labels) {
    return tensor::bce(tensor::clamp(probabilities, 1e-7, 1.0 - 1e-7), labels);
}

namespace {

tensor::Tensor label_tensor(const data::Dataset& dataset, const std::vector<int>& edge_ids) {
    std::vector<double> values;
    values.reserve(edge_ids.size() * data::kLabelCount);
    for (int e : edge_ids) {
        const auto& labels = dataset.interactions.edges()[e].labels;
        for (int k = 0; k < data::kLabelCount; ++k) values.push_back(labels.has(k) ? 1.0 : 0.0);
    }
    return tensor::Tensor::from_rows(static_cast<int>(edge_ids.size()), data::kLabelCount, std::move(values));
}

std::vector<std::vector<double>> snapshot_params(const Model& model) {
    std::vector<std::vector<double>> out;
    for (const auto& [name, p] : model.parameters()) out.push_back(p.value());
    return out;
}

void restore_params(Model& model, const std::vector<std::vector<double>>& values) {
    auto params = model.parameters();
    if (values.size() != params.size()) throw std::runtime_error("parameter snapshot size mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
        if (values[i].size() != params[i].second.value().size()) {
            throw std::runtime_error("parameter snapshot shape mismatch for '" + params[i].first + "'");
        }
        params[i].second.value() = values[i];
    }
}

}  // namespace

TrainResult train(const data::Dataset& dataset, const data::PpiGraph& graph,
                  const partition::PartitionResult& part, const features::AminoAcidEmbedding* embedding,
                  const TrainConfig& config, const EpochCallback& on_epoch, const Checkpoint* resume,
                  const std::vector<std::vector<double>>* feature_override) {
    if (graph.n != dataset.proteins.size()) {
        throw std::runtime_error("graph node count does not match the dataset");
    }
    if (part.train_edges.empty()) throw std::runtime_error("partition has no train edges");

    if (!embedding && resume && resume->embedding) embedding = &*resume->embedding;
    NodeInputs inputs = build_node_inputs(dataset, embedding, config, feature_override);
    const auto message_adj = build_message_graph(graph, part, config.graph_mode);

    Model model = init_model(config, config.ablation == Ablation::PgeOnly
                                         ? inputs.vectors.cols()
                                         : features::kResidueDim);

    tensor::AdamConfig adam_config;
    adam_config.lr = config.lr;
    adam_config.weight_decay = config.weight_decay;
    adam_config.decoupled = config.decoupled_decay;
    tensor::Adam adam(model.parameters(), adam_config);
    tensor::PlateauSchedule schedule(config.lr_reduce_rate, config.lr_patience);

    int start_epoch = 1;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    std::vector<std::vector<double>> best_values = snapshot_params(model);
    if (resume) {
        restore_params(model, resume->last_values);
        adam.restore(resume->adam_step, resume->adam_m, resume->adam_v);
        adam.set_lr(resume->lr);
        schedule.restore(resume->sched_best, resume->sched_bad);
        start_epoch = resume->epoch + 1;
        best_loss = resume->best_loss;
        best_epoch = resume->best_epoch;
        best_values = snapshot_params(resume->model);
    }

    const std::vector<int>& train_edges = part.train_edges;
    const auto all_labels = label_tensor(dataset, train_edges);
    std::vector<std::pair<int, int>> ends(train_edges.size());
    for (size_t i = 0; i < train_edges.size(); ++i) {
        const auto& e = dataset.interactions.edges()[train_edges[i]];
        ends[i] = {e.a, e.b};
    }

    Rng order_rng = Rng(config.seed).fork(0x5u);
    TrainResult result;

    for (int epoch = start_epoch; epoch <= config.epochs; ++epoch) {
        auto order = order_rng.permutation(static_cast<int>(train_edges.size()));
        double loss_sum = 0;
        std::vector<std::array<double, data::kLabelCount>> epoch_probs(train_edges.size());

        for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(config.batch)) {
            const size_t end = std::min(order.size(), begin + static_cast<size_t>(config.batch));
            std::vector<int> idx_a, idx_b;
            std::vector<double> label_rows;
            idx_a.reserve(end - begin);
            idx_b.reserve(end - begin);
            label_rows.reserve((end - begin) * data::kLabelCount);
            for (size_t i = begin; i < end; ++i) {
                const int pos = order[i];
                idx_a.push_back(ends[pos].first);
                idx_b.push_back(ends[pos].second);
                for (int k = 0; k < data::kLabelCount; ++k) {
                    label_rows.push_back(all_labels.at(pos, k));
                }
            }
            auto targets = tensor::Tensor::from_rows(static_cast<int>(end - begin), data::kLabelCount,
                                                     std::move(label_rows));

            auto node_feats = encode_nodes(model, inputs, message_adj);
            auto probs = predict_edges(model, node_feats, idx_a, idx_b);
            auto loss = bce_loss(probs, targets);
            const double loss_value = loss.item();
            if (!std::isfinite(loss_value)) {
                throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                         std::to_string(adam.step_count() + 1));
            }
            loss_sum += loss_value;

            for (size_t i = begin; i < end; ++i) {
                for (int k = 0; k < data::kLabelCount; ++k) {
                    epoch_probs[order[i]][k] = probs.at(static_cast<int>(i - begin), k);
                }
            }

            adam.zero_grad();
            tensor::backward(loss);
            adam.step();
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = adam.lr();
        stats.loss = loss_sum / static_cast<double>(train_edges.size());

        std::vector<data::LabelSet> truth;
        truth.reserve(train_edges.size());
        for (int e : train_edges) truth.push_back(dataset.interactions.edges()[e].labels);
        stats.train_f1 = eval::micro_f1(epoch_probs, truth);

        if (stats.loss < best_loss) {
            best_loss = stats.loss;
            best_epoch = epoch;
            best_values = snapshot_params(model);
        }
        if (schedule.update(stats.loss)) adam.set_lr(adam.lr() * schedule.rate());

        result.history.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }

    Checkpoint& ckpt = result.checkpoint;
    ckpt.last_values = snapshot_params(model);
    ckpt.adam_m = adam.moment1();
    ckpt.adam_v = adam.moment2();
    ckpt.adam_step = adam.step_count();
    ckpt.epoch = config.epochs;
    ckpt.lr = adam.lr();
    ckpt.best_loss = best_loss;
    ckpt.best_epoch = best_epoch;
    ckpt.sched_best = schedule.best();
    ckpt.sched_bad = schedule.bad_epochs();
    restore_params(model, best_values);
    ckpt.model = std::move(model);
    if (embedding) ckpt.embedding = *embedding;
    return result;
}

namespace {

void append_f32(std::vector<float>& blob, const std::vector<double>& values) {
    for (double v : values) blob.push_back(static_cast<float>(v));
}

nlohmann::json tensor_entry(const std::string& name, int rows, int cols, size_t offset) {
    return {{"name", name}, {"rows", rows}, {"cols", cols}, {"offset", offset}};
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& prefix) {
    const auto params = checkpoint.model.parameters();
    if (checkpoint.last_values.size() != params.size() || checkpoint.adam_m.size() != params.size() ||
        checkpoint.adam_v.size() != params.size()) {
        throw std::runtime_error("checkpoint state does not match the parameter list");
    }

    std::vector<float> blob;
    nlohmann::json tensors = nlohmann::json::array();
    auto push = [&](const std::string& name, int rows, int cols, const std::vector<double>& values) {
        tensors.push_back(tensor_entry(name, rows, cols, blob.size()));
        append_f32(blob, values);
    };
    for (size_t i = 0; i < params.size(); ++i) {
        const auto& [name, p] = params[i];
        push(name, p.rows(), p.cols(), p.value());
        push("last." + name, p.rows(), p.cols(), checkpoint.last_values[i]);
        push("adam_m." + name, p.rows(), p.cols(), checkpoint.adam_m[i]);
        push("adam_v." + name, p.rows(), p.cols(), checkpoint.adam_v[i]);
    }

    const std::string bin_path = prefix + ".bin";
    nlohmann::json manifest = {
        {"format", "ppibench-checkpoint-v1"},
        {"config", checkpoint.model.config.to_json()},
        {"input_dim", checkpoint.model.input_dim},
        {"label_order", std::vector<std::string>(data::kLabelNames.begin(), data::kLabelNames.end())},
        {"epoch", checkpoint.epoch},
        {"lr", checkpoint.lr},
        {"best_loss", checkpoint.best_loss},
        {"best_epoch", checkpoint.best_epoch},
        {"sched_best", checkpoint.sched_best},
        {"sched_bad", checkpoint.sched_bad},
        {"adam_step", checkpoint.adam_step},
        {"tensors", std::move(tensors)},
        {"blob", std::filesystem::path(bin_path).filename().string()},
    };
    if (checkpoint.embedding) manifest["embedding"] = features::embedding_to_json(*checkpoint.embedding);

    std::ofstream manifest_out(prefix + ".json");
    if (!manifest_out) throw std::runtime_error("cannot write checkpoint manifest: " + prefix + ".json");
    manifest_out << manifest.dump(2) << '\n';

    std::ofstream blob_out(bin_path, std::ios::binary);
    if (!blob_out) throw std::runtime_error("cannot write checkpoint blob: " + bin_path);
    blob_out.write(reinterpret_cast<const char*>(blob.data()),
                   static_cast<std::streamsize>(blob.size() * sizeof(float)));
}

Checkpoint load_checkpoint(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open checkpoint manifest: " + json_path);
    nlohmann::json manifest;
    in >> manifest;
    if (manifest.value("format", "") != "ppibench-checkpoint-v1") {
        throw std::runtime_error("unrecognized checkpoint format in " + json_path);
    }

    const auto blob_path =
        std::filesystem::path(json_path).parent_path() / manifest.at("blob").get<std::string>();
    std::ifstream blob_in(blob_path, std::ios::binary);
    if (!blob_in) throw std::runtime_error("cannot open checkpoint blob: " + blob_path.string());
    blob_in.seekg(0, std::ios::end);
    const auto size = blob_in.tellg();
    blob_in.seekg(0);
    std::vector<char> bytes(static_cast<size_t>(size));
    blob_in.read(bytes.data(), size);
    if (!blob_in) throw std::runtime_error("checkpoint blob read failed: " + blob_path.string());
    std::vector<float> floats(bytes.size() / sizeof(float));
    std::memcpy(floats.data(), bytes.data(), floats.size() * sizeof(float));

    std::unordered_map<std::string, std::vector<double>> by_name;
    for (const auto& t : manifest.at("tensors")) {
        const size_t offset = t.at("offset").get<size_t>();
        const size_t count = static_cast<size_t>(t.at("rows").get<int>()) * t.at("cols").get<int>();
        if (offset + count > floats.size()) throw std::runtime_error("checkpoint blob truncated");
        std::vector<double> values(count);
        for (size_t i = 0; i < count; ++i) values[i] = floats[offset + i];
        by_name.emplace(t.at("name").get<std::string>(), std::move(values));
    }

    Checkpoint ckpt;
    TrainConfig config = TrainConfig::from_json(manifest.at("config"));
    ckpt.model = init_model(config, manifest.at("input_dim").get<int>());
    auto params = ckpt.model.parameters();
    auto take = [&](const std::string& name) {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw std::runtime_error("checkpoint is missing tensor '" + name + "'");
        return it->second;
    };
    for (auto& [name, p] : params) {
        auto values = take(name);
        if (values.size() != p.value().size()) {
            throw std::runtime_error("checkpoint tensor '" + name + "' has the wrong shape");
        }
        p.value() = std::move(values);
        ckpt.last_values.push_back(take("last." + name));
        ckpt.adam_m.push_back(take("adam_m." + name));
        ckpt.adam_v.push_back(take("adam_v." + name));
    }

    ckpt.epoch = manifest.at("epoch").get<int>();
    ckpt.lr = manifest.at("lr").get<double>();
    ckpt.best_loss = manifest.at("best_loss").get<double>();
    ckpt.best_epoch = manifest.at("best_epoch").get<int>();
    ckpt.sched_best = manifest.at("sched_best").get<double>();
    ckpt.sched_bad = manifest.at("sched_bad").get<int>();
    ckpt.adam_step = manifest.at("adam_step").get<int64_t>();
    if (manifest.contains("embedding")) {
        ckpt.embedding = features::embedding_from_json(manifest.at("embedding"));
    }
    return ckpt;
}

}  // namespace ppibench::model
