#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ppibench/dataset.hpp"
#include "ppibench/features.hpp"
#include "ppibench/layers.hpp"
#include "ppibench/partition.hpp"
#include "ppibench/tensor.hpp"

namespace ppibench::model {

enum class GraphMode { GCA, GCT };
enum class Ablation { Full, PieOnly, PgeOnly };

std::string to_string(GraphMode mode);
std::string to_string(Ablation ablation);
std::optional<GraphMode> graph_mode_from_string(std::string_view name);
std::optional<Ablation> ablation_from_string(std::string_view name);

struct TrainConfig {
    // architecture
    int pie_dim = 256;
    int pge_dim = 50;
    int gin_layers = 1;
    int conv_channels = 64;
    int conv_kernel = 3;
    int pool_width = 2;
    int gru_hidden = 64;
    int max_len = 2000;
    // optimization
    double lr = 1e-3;
    int batch = 1024;
    int epochs = 300;
    double lr_reduce_rate = 0.5;
    int lr_patience = 20;
    double weight_decay = 5e-4;
    bool decoupled_decay = false;
    // task setup
    GraphMode graph_mode = GraphMode::GCA;
    Ablation ablation = Ablation::Full;
    bool scalar_pair_product = false;  // dot product as scalar instead of elementwise
    int ac_lag = 30;                   // handcrafted features for pge_only
    uint64_t seed = 1;
    bool desk_scale = false;

    /// Shrinks dims for fast runs: pie 32, pge 16, batch 64, max_len 256,
    /// conv channels 16, gru hidden 16. Full-scale values stay the default.
    void apply_desk_scale();

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

struct GinLayer {
    tensor::Tensor epsilon;   // [1,1], learnable, init 0
    tensor::Tensor w1, b1;    // in -> out
    tensor::Tensor w2, b2;    // out -> out
};

struct Model {
    TrainConfig config;
    int input_dim = features::kResidueDim;  // node input width (13, or AC+CTD for pge_only)

    // PIE: conv -> pool -> bigru -> fc (absent for pge_only)
    tensor::Tensor conv_w, conv_b;
    tensor::GruParams gru_fw, gru_bw;
    tensor::Tensor fc_w, fc_b;

    std::vector<GinLayer> gin;  // empty for pie_only

    tensor::Tensor cls_w, cls_b;  // final classifier to 7 types

    std::vector<std::pair<std::string, tensor::Tensor>> parameters() const;
    int node_dim() const;  // width of per-protein features fed to the classifier
};

Model init_model(const TrainConfig& config, int input_dim);

/// Per-protein node inputs, depending on the ablation.
struct NodeInputs {
    std::vector<tensor::Tensor> matrices;  // Full/PieOnly: constant [T,13] per protein
    tensor::Tensor vectors;                // PgeOnly: constant [n, ac+ctd]
};

NodeInputs build_node_inputs(const data::Dataset& dataset, const features::AminoAcidEmbedding* embedding,
                             const TrainConfig& config,
                             const std::vector<std::vector<double>>* feature_override = nullptr);

/// GCA: adjacency over every edge; GCT: train edges only (test-only
/// proteins come out isolated).
std::vector<std::vector<int>> build_message_graph(const data::PpiGraph& graph,
                                                  const partition::PartitionResult& part, GraphMode mode);

/// Sequence encoder: conv1d -> relu -> maxpool -> BiGRU -> mean over time
/// -> FC. Output width pie_dim regardless of sequence length.
tensor::Tensor pie_encode(const tensor::Tensor& matrix, const Model& model);

/// g' = MLP((1+eps) * g + sum of neighbor rows)
tensor::Tensor gin_forward(const tensor::Tensor& nodes, const std::vector<std::vector<int>>& adj,
                           const GinLayer& layer);

/// Full node pipeline for all proteins: [n, node_dim]
tensor::Tensor encode_nodes(const Model& model, const NodeInputs& inputs,
                            const std::vector<std::vector<int>>& message_adj);

/// sigma(FC(g_i . g_j)); symmetric in its arguments
tensor::Tensor predict_pair(const tensor::Tensor& g_i, const tensor::Tensor& g_j, const Model& model);

/// probabilities for protein index pairs against precomputed node features
tensor::Tensor predict_edges(const Model& model, const tensor::Tensor& node_feats,
                             const std::vector<int>& idx_a, const std::vector<int>& idx_b);

/// Summed multi-task binary cross-entropy; predictions are clamped to
/// [1e-7, 1-1e-7] before the logs.
tensor::Tensor bce_loss(const tensor::Tensor& probabilities, const tensor::Tensor& labels);

struct EpochStats {
    int epoch = 0;
    double lr = 0;
    double loss = 0;  // per-edge mean of the summed BCE
    double train_f1 = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

struct Checkpoint {
    Model model;  // best-loss parameters
    std::optional<features::AminoAcidEmbedding> embedding;
    std::vector<std::vector<double>> last_values;  // parameters() order
    std::vector<std::vector<double>> adam_m, adam_v;
    int64_t adam_step = 0;
    int epoch = 0;  // last completed epoch
    double lr = 0;
    double best_loss = 0;
    int best_epoch = 0;
    double sched_best = 0;
    int sched_bad = 0;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<EpochStats> history;
};

TrainResult train(const data::Dataset& dataset, const data::PpiGraph& graph,
                  const partition::PartitionResult& part, const features::AminoAcidEmbedding* embedding,
                  const TrainConfig& config, const EpochCallback& on_epoch = nullptr,
                  const Checkpoint* resume = nullptr,
                  const std::vector<std::vector<double>>* feature_override = nullptr);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& prefix);
Checkpoint load_checkpoint(const std::string& json_path);

}  // namespace ppibench::model
