#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ppibench/dataset.hpp"
#include "ppibench/model.hpp"
#include "ppibench/partition.hpp"

namespace ppibench::eval {

using Probs = std::vector<std::array<double, data::kLabelCount>>;

struct LabelScore {
    int64_t tp = 0, fp = 0, fn = 0;
    double f1 = 0;
    bool defined = false;  // false when truth and prediction are both empty
};

struct StratumScore {
    double micro_f1 = 0;
    int64_t edges = 0;
    double proportion = 0;
    std::array<LabelScore, data::kLabelCount> per_type{};
};

struct MetricReport {
    double threshold = 0.5;
    double micro_f1 = 0;                                  // pooled over the whole testset (Avg)
    int64_t tp = 0, fp = 0, fn = 0;
    std::array<LabelScore, data::kLabelCount> per_type{};
    std::map<std::string, StratumScore> strata;           // BS/ES/NS present only when non-empty, plus Avg
    int64_t evaluated_edges = 0;
    int64_t excluded_edges = 0;                           // cross-eval: trainset overlap
};

/// Pooled confusion counts over all (sample, label) cells; F1 = 2TP /
/// (2TP + FP + FN), 0 when the denominator is 0.
double micro_f1(const Probs& predictions, const std::vector<data::LabelSet>& labels, double threshold = 0.5);

std::array<LabelScore, data::kLabelCount> per_type_f1(const Probs& predictions,
                                                      const std::vector<data::LabelSet>& labels,
                                                      double threshold = 0.5);

/// Metric assembly from raw predictions plus a stratum tag per edge;
/// `strata` entries may be BS/ES/NS. Used by both eval entry points.
MetricReport score_stratified(const Probs& predictions, const std::vector<data::LabelSet>& labels,
                              const std::vector<partition::Stratum>& strata, double threshold = 0.5);

/// Encodes the dataset with the checkpoint's graph mode and scores the
/// partition's testset per stratum.
MetricReport stratified_eval(const model::Checkpoint& checkpoint, const data::Dataset& dataset,
                             const data::PpiGraph& graph, const partition::PartitionResult& part,
                             double threshold = 0.5);

/// Scores dataset B with a model trained on dataset A. Edges of B that
/// were in A's trainset are excluded; the message graph is GCA over B;
/// strata reflect A-trainset seen/unseen status of the endpoints.
MetricReport cross_eval(const model::Checkpoint& checkpoint, const data::Dataset& dataset_a,
                        const partition::PartitionResult& part_a, const data::Dataset& dataset_b,
                        double threshold = 0.5);

nlohmann::json report_to_json(const MetricReport& report);
void write_report_csv(const MetricReport& report, const std::string& path);

}  // namespace ppibench::eval
