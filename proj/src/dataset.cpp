#include "ppibench/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ppibench::data {

namespace {

uint64_t pair_key(int a, int b) {
    return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(line);
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

std::optional<int> label_index(std::string_view name) {
    for (int i = 0; i < kLabelCount; ++i) {
        const std::string_view cand = kLabelNames[i];
        if (cand.size() != name.size()) continue;
        bool eq = true;
        for (size_t k = 0; k < cand.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(name[k])) != cand[k]) { eq = false; break; }
        }
        if (eq) return i;
    }
    return std::nullopt;
}

std::string valid_label_names() {
    std::string out;
    for (int i = 0; i < kLabelCount; ++i) {
        if (i) out += ", ";
        out += kLabelNames[i];
    }
    return out;
}

int LabelSet::count() const { return std::popcount(bits_); }

std::vector<std::string> LabelSet::names() const {
    std::vector<std::string> out;
    for (int i = 0; i < kLabelCount; ++i)
        if (has(i)) out.emplace_back(kLabelNames[i]);
    return out;
}

int ProteinTable::add(const std::string& id) {
    auto it = by_id_.find(id);
    if (it != by_id_.end()) return it->second;
    int index = static_cast<int>(ids_.size());
    ids_.push_back(id);
    sequences_.emplace_back();
    by_id_.emplace(id, index);
    return index;
}

std::optional<int> ProteinTable::find(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

int InteractionTable::add(int a, int b, LabelSet labels) {
    if (a == b) throw std::runtime_error("self-interaction: protein index " + std::to_string(a));
    if (a > b) std::swap(a, b);
    auto it = lookup_.find(pair_key(a, b));
    if (it != lookup_.end()) {
        Interaction& e = edges_[it->second];
        e.labels = e.labels.union_with(labels);
        return it->second;
    }
    int index = static_cast<int>(edges_.size());
    edges_.push_back(Interaction{a, b, labels});
    lookup_.emplace(pair_key(a, b), index);
    return index;
}

std::optional<int> InteractionTable::find(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = lookup_.find(pair_key(a, b));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

Dataset parse_interactions(std::istream& in, InteractionFormat format) {
    Dataset dataset;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("interaction file is empty");
    line = strip_cr(line);

    const auto header = split(line, '\t');
    const std::string want_type = format == InteractionFormat::RowPerType ? "type" : "types";
    if (header.size() < 3 || lower(header[0]) != "protein_a" || lower(header[1]) != "protein_b" ||
        lower(header[2]) != want_type) {
        throw std::runtime_error("line 1: expected header 'protein_a\tprotein_b\t" + want_type + "'");
    }

    int line_no = 1;
    int rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cols = split(line, '\t');
        if (cols.size() < 3 || cols[0].empty() || cols[1].empty() || cols[2].empty()) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": malformed row, expected 3 tab-separated columns");
        }

        LabelSet labels;
        if (format == InteractionFormat::RowPerType) {
            auto idx = label_index(cols[2]);
            if (!idx) {
                throw std::runtime_error("line " + std::to_string(line_no) + ": unknown interaction type '" +
                                         cols[2] + "' (valid: " + valid_label_names() + ")");
            }
            labels.set(*idx);
        } else {
            for (const auto& name : split(cols[2], ',')) {
                auto idx = label_index(name);
                if (!idx) {
                    throw std::runtime_error("line " + std::to_string(line_no) + ": unknown interaction type '" +
                                             name + "' (valid: " + valid_label_names() + ")");
                }
                labels.set(*idx);
            }
        }
        if (labels.empty()) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": row carries no interaction type");
        }

        if (cols[0] == cols[1]) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": self-interaction for protein '" +
                                     cols[0] + "'");
        }
        int a = dataset.proteins.add(cols[0]);
        int b = dataset.proteins.add(cols[1]);
        dataset.interactions.add(a, b, labels);
        ++rows;
    }
    if (rows == 0) throw std::runtime_error("interaction file has a header but no rows");
    return dataset;
}

Dataset parse_interactions(const std::string& text, InteractionFormat format) {
    std::istringstream in(text);
    return parse_interactions(in, format);
}

const std::string* SequenceSet::find(const std::string& id) const {
    for (const auto& [rid, seq] : records)
        if (rid == id) return &seq;
    return nullptr;
}

SequenceSet parse_sequences(std::istream& in) {
    SequenceSet out;
    std::string line;
    std::string current_id;
    std::string current_seq;
    bool have_record = false;
    int line_no = 0;

    auto flush = [&]() {
        if (!have_record) return;
        if (current_seq.empty()) {
            throw std::runtime_error("FASTA record '" + current_id + "' has an empty sequence");
        }
        for (const auto& [rid, _] : out.records) {
            if (rid == current_id) throw std::runtime_error("duplicate FASTA id '" + current_id + "'");
        }
        out.records.emplace_back(current_id, current_seq);
        current_seq.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (line[0] == '>') {
            flush();
            // id = first whitespace-delimited token after '>'
            size_t end = line.find_first_of(" \t", 1);
            current_id = line.substr(1, end == std::string::npos ? std::string::npos : end - 1);
            if (current_id.empty()) {
                throw std::runtime_error("line " + std::to_string(line_no) + ": FASTA header with empty id");
            }
            have_record = true;
            continue;
        }
        if (!have_record) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": sequence data before any FASTA header");
        }
        for (char c : line) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            if (u < 'A' || u > 'Z') {
                u = 'X';
                ++out.replaced_chars;
            }
            current_seq.push_back(u);
        }
    }
    flush();
    if (out.records.empty()) throw std::runtime_error("FASTA file is empty");
    return out;
}

SequenceSet parse_sequences(const std::string& text) {
    std::istringstream in(text);
    return parse_sequences(in);
}

int attach_sequences(Dataset& dataset, const SequenceSet& sequences) {
    int matched = 0;
    for (const auto& [id, seq] : sequences.records) {
        if (auto idx = dataset.proteins.find(id)) {
            dataset.proteins.set_sequence(*idx, seq);
            ++matched;
        }
    }
    return matched;
}

PpiGraph graph_from_pairs(int n, const std::vector<std::pair<int, int>>& edges) {
    PpiGraph g;
    g.n = n;
    g.edge_count = static_cast<int64_t>(edges.size());
    g.adjacency.assign(n, {});
    for (size_t e = 0; e < edges.size(); ++e) {
        auto [a, b] = edges[e];
        if (a < 0 || b < 0 || a >= n || b >= n) {
            throw std::runtime_error("edge " + std::to_string(e) + " endpoint out of range (n=" +
                                     std::to_string(n) + ")");
        }
        g.adjacency[a].emplace_back(b, static_cast<int>(e));
        g.adjacency[b].emplace_back(a, static_cast<int>(e));
    }
    for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
    return g;
}

PpiGraph build_graph(const InteractionTable& interactions, int n) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(interactions.size());
    for (const auto& e : interactions.edges()) pairs.emplace_back(e.a, e.b);
    return graph_from_pairs(n, pairs);
}

std::vector<int> neighbors(const PpiGraph& graph, int p) {
    if (p < 0 || p >= graph.n) {
        throw std::runtime_error("protein index " + std::to_string(p) + " out of range (n=" +
                                 std::to_string(graph.n) + ")");
    }
    std::vector<int> out;
    out.reserve(graph.adjacency[p].size());
    for (const auto& [v, e] : graph.adjacency[p]) out.push_back(v);
    return out;
}

nlohmann::json dataset_to_json(const Dataset& dataset) {
    nlohmann::json proteins = nlohmann::json::array();
    for (int i = 0; i < dataset.proteins.size(); ++i) {
        nlohmann::json p = {{"id", dataset.proteins.id_of(i)}};
        if (const auto& seq = dataset.proteins.sequence(i)) p["sequence"] = *seq;
        proteins.push_back(std::move(p));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : dataset.interactions.edges()) {
        edges.push_back({{"a", e.a}, {"b", e.b}, {"labels", e.labels.names()}});
    }
    return {{"proteins", std::move(proteins)}, {"edges", std::move(edges)}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
    Dataset dataset;
    if (!j.contains("proteins") || !j.contains("edges")) {
        throw std::runtime_error("dataset JSON must have 'proteins' and 'edges'");
    }
    for (const auto& p : j.at("proteins")) {
        const std::string id = p.at("id").get<std::string>();
        if (dataset.proteins.find(id)) throw std::runtime_error("duplicate protein id '" + id + "'");
        int idx = dataset.proteins.add(id);
        if (p.contains("sequence")) dataset.proteins.set_sequence(idx, p.at("sequence").get<std::string>());
    }
    const int n = dataset.proteins.size();
    for (const auto& e : j.at("edges")) {
        int a = e.at("a").get<int>();
        int b = e.at("b").get<int>();
        if (a < 0 || b < 0 || a >= n || b >= n) {
            throw std::runtime_error("edge endpoint out of range in dataset JSON");
        }
        LabelSet labels;
        for (const auto& name : e.at("labels")) {
            auto idx = label_index(name.get<std::string>());
            if (!idx) {
                throw std::runtime_error("unknown label '" + name.get<std::string>() + "' in dataset JSON (valid: " +
                                         valid_label_names() + ")");
            }
            labels.set(*idx);
        }
        if (labels.empty()) throw std::runtime_error("edge with empty label set in dataset JSON");
        dataset.interactions.add(a, b, labels);
    }
    return dataset;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    nlohmann::json j;
    in >> j;
    return dataset_from_json(j);
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << dataset_to_json(dataset).dump(2) << '\n';
}

}  // namespace ppibench::data
