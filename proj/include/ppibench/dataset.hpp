#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ppibench/labels.hpp"

namespace ppibench::data {

/// Protein ids with dense indices assigned in first-appearance order.
class ProteinTable {
public:
    int add(const std::string& id);  // get-or-create
    std::optional<int> find(const std::string& id) const;
    int size() const { return static_cast<int>(ids_.size()); }
    const std::string& id_of(int index) const { return ids_.at(index); }
    const std::optional<std::string>& sequence(int index) const { return sequences_.at(index); }
    void set_sequence(int index, std::string seq) { sequences_.at(index) = std::move(seq); }

private:
    std::vector<std::string> ids_;
    std::vector<std::optional<std::string>> sequences_;
    std::unordered_map<std::string, int> by_id_;
};

struct Interaction {
    int a = 0;  // always a < b (dense indices)
    int b = 0;
    LabelSet labels;
};

class InteractionTable {
public:
    /// Inserts or merges (duplicate unordered pairs merge by label union).
    /// Returns the edge index. Throws on self-pairs.
    int add(int a, int b, LabelSet labels);
    std::optional<int> find(int a, int b) const;
    const std::vector<Interaction>& edges() const { return edges_; }
    int size() const { return static_cast<int>(edges_.size()); }

private:
    std::vector<Interaction> edges_;
    std::unordered_map<uint64_t, int> lookup_;
};

struct PpiGraph {
    int n = 0;
    int64_t edge_count = 0;
    // per node, sorted by neighbor index; second = edge index
    std::vector<std::vector<std::pair<int, int>>> adjacency;

    int degree(int p) const { return static_cast<int>(adjacency.at(p).size()); }
};

struct Dataset {
    ProteinTable proteins;
    InteractionTable interactions;
};

enum class InteractionFormat { RowPerType, MultiLabelRow };

Dataset parse_interactions(std::istream& in, InteractionFormat format);
Dataset parse_interactions(const std::string& text, InteractionFormat format);

struct SequenceSet {
    // insertion-ordered ids so reports stay deterministic
    std::vector<std::pair<std::string, std::string>> records;
    int replaced_chars = 0;

    const std::string* find(const std::string& id) const;
};

SequenceSet parse_sequences(std::istream& in);
SequenceSet parse_sequences(const std::string& text);

/// Copies matching sequences into the protein table; returns how many
/// proteins got one. Ids absent from the table are ignored.
int attach_sequences(Dataset& dataset, const SequenceSet& sequences);

PpiGraph build_graph(const InteractionTable& interactions, int n);
PpiGraph graph_from_pairs(int n, const std::vector<std::pair<int, int>>& edges);
std::vector<int> neighbors(const PpiGraph& graph, int p);

nlohmann::json dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j);
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path);

}  // namespace ppibench::data
