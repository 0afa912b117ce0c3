#include "ppibench/eval.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ppibench::eval {

namespace {

struct Confusion {
    int64_t tp = 0, fp = 0, fn = 0;

    void add(bool truth, bool predicted) {
        if (truth && predicted) ++tp;
        else if (!truth && predicted) ++fp;
        else if (truth && !predicted) ++fn;
    }

    double f1() const {
        const int64_t denom = 2 * tp + fp + fn;
        return denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
    }
};

void check_shapes(const Probs& predictions, const std::vector<data::LabelSet>& labels) {
    if (predictions.empty()) throw std::runtime_error("micro-F1 on an empty batch");
    if (predictions.size() != labels.size()) {
        throw std::runtime_error("predictions (" + std::to_string(predictions.size()) + ") and labels (" +
                                 std::to_string(labels.size()) + ") differ in length");
    }
}

Confusion pool(const Probs& predictions, const std::vector<data::LabelSet>& labels, double threshold) {
    Confusion c;
    for (size_t i = 0; i < predictions.size(); ++i) {
        for (int k = 0; k < data::kLabelCount; ++k) {
            c.add(labels[i].has(k), predictions[i][k] >= threshold);
        }
    }
    return c;
}

}  // namespace

double micro_f1(const Probs& predictions, const std::vector<data::LabelSet>& labels, double threshold) {
    check_shapes(predictions, labels);
    return pool(predictions, labels, threshold).f1();
}

std::array<LabelScore, data::kLabelCount> per_type_f1(const Probs& predictions,
                                                      const std::vector<data::LabelSet>& labels,
                                                      double threshold) {
    check_shapes(predictions, labels);
    std::array<LabelScore, data::kLabelCount> out{};
    for (int k = 0; k < data::kLabelCount; ++k) {
        Confusion c;
        for (size_t i = 0; i < predictions.size(); ++i) {
            c.add(labels[i].has(k), predictions[i][k] >= threshold);
        }
        out[k].tp = c.tp;
        out[k].fp = c.fp;
        out[k].fn = c.fn;
        out[k].f1 = c.f1();
        out[k].defined = (c.tp + c.fp + c.fn) > 0;
    }
    return out;
}

MetricReport score_stratified(const Probs& predictions, const std::vector<data::LabelSet>& labels,
                              const std::vector<partition::Stratum>& strata, double threshold) {
    check_shapes(predictions, labels);
    if (strata.size() != predictions.size()) {
        throw std::runtime_error("strata and predictions differ in length");
    }

    MetricReport report;
    report.threshold = threshold;
    report.evaluated_edges = static_cast<int64_t>(predictions.size());

    const Confusion overall = pool(predictions, labels, threshold);
    report.micro_f1 = overall.f1();
    report.tp = overall.tp;
    report.fp = overall.fp;
    report.fn = overall.fn;
    report.per_type = per_type_f1(predictions, labels, threshold);

    for (partition::Stratum s : {partition::Stratum::BS, partition::Stratum::ES, partition::Stratum::NS}) {
        Probs sub_p;
        std::vector<data::LabelSet> sub_l;
        for (size_t i = 0; i < strata.size(); ++i) {
            if (strata[i] == s) {
                sub_p.push_back(predictions[i]);
                sub_l.push_back(labels[i]);
            }
        }
        if (sub_p.empty()) continue;  // absent strata are omitted, not zeroed
        StratumScore score;
        score.micro_f1 = pool(sub_p, sub_l, threshold).f1();
        score.edges = static_cast<int64_t>(sub_p.size());
        score.proportion = static_cast<double>(sub_p.size()) / static_cast<double>(predictions.size());
        score.per_type = per_type_f1(sub_p, sub_l, threshold);
        report.strata.emplace(partition::to_string(s), score);
    }

    StratumScore avg;
    avg.micro_f1 = report.micro_f1;  // pooled over the whole testset, not a mean of strata
    avg.edges = report.evaluated_edges;
    avg.proportion = 1.0;
    avg.per_type = report.per_type;
    report.strata.emplace("Avg", avg);
    return report;
}

namespace {

Probs run_model(const model::Checkpoint& checkpoint, const data::Dataset& dataset,
                const std::vector<std::vector<int>>& message_adj, const std::vector<int>& idx_a,
                const std::vector<int>& idx_b) {
    const features::AminoAcidEmbedding* embedding =
        checkpoint.embedding ? &*checkpoint.embedding : nullptr;
    auto inputs = model::build_node_inputs(dataset, embedding, checkpoint.model.config);
    auto node_feats = model::encode_nodes(checkpoint.model, inputs, message_adj);
    auto probs = model::predict_edges(checkpoint.model, node_feats, idx_a, idx_b);

    Probs out(idx_a.size());
    for (size_t i = 0; i < idx_a.size(); ++i) {
        for (int k = 0; k < data::kLabelCount; ++k) out[i][k] = probs.at(static_cast<int>(i), k);
    }
    return out;
}

}  // namespace

MetricReport stratified_eval(const model::Checkpoint& checkpoint, const data::Dataset& dataset,
                             const data::PpiGraph& graph, const partition::PartitionResult& part,
                             double threshold) {
    if (part.test_edges.empty()) throw std::runtime_error("empty testset");

    const auto message_adj = model::build_message_graph(graph, part, checkpoint.model.config.graph_mode);
    std::vector<int> idx_a, idx_b;
    std::vector<data::LabelSet> labels;
    for (int e : part.test_edges) {
        const auto& edge = dataset.interactions.edges()[e];
        idx_a.push_back(edge.a);
        idx_b.push_back(edge.b);
        labels.push_back(edge.labels);
    }

    auto probs = run_model(checkpoint, dataset, message_adj, idx_a, idx_b);
    return score_stratified(probs, labels, part.strata, threshold);
}

MetricReport cross_eval(const model::Checkpoint& checkpoint, const data::Dataset& dataset_a,
                        const partition::PartitionResult& part_a, const data::Dataset& dataset_b,
                        double threshold) {
    // A-side lookup keyed by protein id so B may contain new proteins
    std::set<std::string> seen_a;
    for (int p : part_a.seen) seen_a.insert(dataset_a.proteins.id_of(p));
    std::set<std::pair<std::string, std::string>> train_pairs;
    for (int e : part_a.train_edges) {
        const auto& edge = dataset_a.interactions.edges()[e];
        std::string ia = dataset_a.proteins.id_of(edge.a);
        std::string ib = dataset_a.proteins.id_of(edge.b);
        if (ib < ia) std::swap(ia, ib);
        train_pairs.emplace(std::move(ia), std::move(ib));
    }

    std::vector<int> idx_a, idx_b;
    std::vector<data::LabelSet> labels;
    std::vector<partition::Stratum> strata;
    int64_t excluded = 0;
    for (const auto& edge : dataset_b.interactions.edges()) {
        std::string ia = dataset_b.proteins.id_of(edge.a);
        std::string ib = dataset_b.proteins.id_of(edge.b);
        std::string lo = ia, hi = ib;
        if (hi < lo) std::swap(lo, hi);
        if (train_pairs.count({lo, hi})) {
            ++excluded;
            continue;
        }
        idx_a.push_back(edge.a);
        idx_b.push_back(edge.b);
        labels.push_back(edge.labels);
        const int seen_count = (seen_a.count(ia) ? 1 : 0) + (seen_a.count(ib) ? 1 : 0);
        strata.push_back(seen_count == 2   ? partition::Stratum::BS
                         : seen_count == 1 ? partition::Stratum::ES
                                           : partition::Stratum::NS);
    }
    if (idx_a.empty()) throw std::runtime_error("cross-eval: no evaluable edges after trainset exclusion");

    // message graph: GCA over B's full edge set
    auto graph_b = data::build_graph(dataset_b.interactions, dataset_b.proteins.size());
    std::vector<std::vector<int>> message_adj(graph_b.n);
    for (int p = 0; p < graph_b.n; ++p) {
        for (const auto& [v, e] : graph_b.adjacency[p]) message_adj[p].push_back(v);
    }

    auto probs = run_model(checkpoint, dataset_b, message_adj, idx_a, idx_b);
    auto report = score_stratified(probs, labels, strata, threshold);
    report.excluded_edges = excluded;
    return report;
}

nlohmann::json report_to_json(const MetricReport& report) {
    nlohmann::json per_type = nlohmann::json::object();
    for (int k = 0; k < data::kLabelCount; ++k) {
        const auto& s = report.per_type[k];
        per_type[std::string(data::kLabelNames[k])] = {
            {"f1", s.f1}, {"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn}, {"defined", s.defined}};
    }
    nlohmann::json strata = nlohmann::json::object();
    for (const auto& [name, s] : report.strata) {
        nlohmann::json stratum_types = nlohmann::json::object();
        for (int k = 0; k < data::kLabelCount; ++k) {
            stratum_types[std::string(data::kLabelNames[k])] = s.per_type[k].f1;
        }
        strata[name] = {{"micro_f1", s.micro_f1},
                        {"edges", s.edges},
                        {"proportion", s.proportion},
                        {"per_type_f1", std::move(stratum_types)}};
    }
    return {{"threshold", report.threshold},
            {"micro_f1", report.micro_f1},
            {"counts", {{"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}}},
            {"per_type", std::move(per_type)},
            {"strata", std::move(strata)},
            {"evaluated_edges", report.evaluated_edges},
            {"excluded_trainset_edges", report.excluded_edges}};
}

void write_report_csv(const MetricReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV report: " + path);
    out << "stratum,label,f1,tp,fp,fn\n";
    for (const auto& [name, s] : report.strata) {
        out << name << ",__micro__," << s.micro_f1 << ",,,\n";
        for (int k = 0; k < data::kLabelCount; ++k) {
            const auto& t = s.per_type[k];
            out << name << ',' << data::kLabelNames[k] << ',' << t.f1 << ',' << t.tp << ',' << t.fp << ','
                << t.fn << '\n';
        }
    }
}

}  // namespace ppibench::eval
