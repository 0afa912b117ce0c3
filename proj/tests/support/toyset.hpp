#pragma once

// Synthetic dataset used across the training / evaluation tests: a small
// PPI graph whose labels follow rules the model can actually learn.
//   - 2 sequence communities, each marked by a planted 5-letter motif
//     (W/H repeated; the base alphabet avoids those letters)
//   - edges prefer intra-community pairs; a low-degree periphery keeps
//     BFS/DFS roots available at the default threshold t=5
//   - label bits: reaction/binding/inhibition come from the endpoint
//     communities (sequence-recoverable); ptmod follows the majority
//     community of the pair's neighbors, and activation/catalysis/
//     expression are degree functions; those four need the graph, which
//     is what separates the graph-aware model from the sequence-only
//     ablation on unseen proteins.

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "ppibench/dataset.hpp"
#include "ppibench/rng.hpp"

namespace ppibench::testsupport {

struct ToyConfig {
    int proteins = 50;
    int edges = 200;
    int communities = 2;
    double intra_community_bias = 0.7;
    uint64_t seed = 7;
    int min_len = 40;
    int len_spread = 40;
};

inline data::Dataset make_toy_dataset(const ToyConfig& config = {}) {
    Rng rng(config.seed);
    const char base_alphabet[] = "ARNDQEGILKFPSTYV";  // no W/H/C/M
    const char motif_letter[] = {'W', 'H', 'C', 'M'};  // one per community

    data::Dataset dataset;
    for (int i = 0; i < config.proteins; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "P%03d", i);
        int idx = dataset.proteins.add(buf);

        const int len = config.min_len + rng.below_int(config.len_spread);
        std::string seq(len, 'A');
        for (char& c : seq) c = base_alphabet[rng.below_int(16)];
        const char motif = motif_letter[i % config.communities];
        for (int rep = 0; rep < 2; ++rep) {
            const int pos = rng.below_int(len - 5);
            for (int k = 0; k < 5; ++k) seq[pos + k] = motif;
        }
        dataset.proteins.set_sequence(idx, seq);
    }

    auto community = [&](int p) { return p % config.communities; };
    // core proteins form the dense part; the periphery gets 1-3 edges each
    // so low-degree BFS/DFS roots exist (t=5 works out of the box)
    const int periphery = std::max(4, config.proteins / 6);
    const int core = config.proteins - periphery;
    std::vector<std::pair<int, int>> pairs;
    {
        std::vector<std::vector<char>> used(config.proteins, std::vector<char>(config.proteins, 0));
        auto try_add = [&](int a, int b) {
            if (a == b || used[a][b]) return false;
            used[a][b] = used[b][a] = 1;
            pairs.emplace_back(a, b);
            return true;
        };
        for (int p = core; p < config.proteins; ++p) {
            const int wanted = 1 + rng.below_int(3);
            for (int k = 0; k < wanted; ++k) try_add(p, rng.below_int(core));
        }
        while (static_cast<int>(pairs.size()) < config.edges) {
            int a = rng.below_int(core);
            int b;
            if (rng.bernoulli(config.intra_community_bias)) {
                b = a;
                for (int tries = 0; tries < 64 && (b == a || community(b) != community(a)); ++tries) {
                    b = rng.below_int(core);
                    if (community(b) != community(a)) b = a;
                }
            } else {
                b = rng.below_int(core);
            }
            if (a == b) continue;
            try_add(a, b);
        }
    }

    std::vector<int> degree(config.proteins, 0);
    std::vector<std::vector<int>> adj(config.proteins);
    for (auto [a, b] : pairs) {
        ++degree[a];
        ++degree[b];
        adj[a].push_back(b);
        adj[b].push_back(a);
    }

    for (auto [a, b] : pairs) {
        data::LabelSet labels;
        // sequence-recoverable bits
        if (community(a) == 0 || community(b) == 0) labels.set(0);  // reaction
        if (community(a) == 1 || community(b) == 1) labels.set(1);  // binding
        if (community(a) == community(b)) labels.set(4);            // inhibition
        // graph-only bits
        int votes0 = 0, votes1 = 0;
        for (int v : adj[a]) (community(v) == 0 ? votes0 : votes1)++;
        for (int v : adj[b]) (community(v) == 0 ? votes0 : votes1)++;
        if (votes0 >= votes1) labels.set(2);                       // ptmod
        if (degree[a] + degree[b] >= 14) labels.set(3);            // activation
        if (std::max(degree[a], degree[b]) >= 9) labels.set(5);    // catalysis
        if (std::min(degree[a], degree[b]) >= 9) labels.set(6);    // expression
        dataset.interactions.add(a, b, labels);
    }
    return dataset;
}

/// TSV + FASTA renderings of a dataset, for CLI fixtures.
inline std::string to_interaction_tsv(const data::Dataset& dataset) {
    std::string out = "protein_a\tprotein_b\ttypes\n";
    for (const auto& e : dataset.interactions.edges()) {
        out += dataset.proteins.id_of(e.a);
        out += '\t';
        out += dataset.proteins.id_of(e.b);
        out += '\t';
        bool first = true;
        for (const auto& name : e.labels.names()) {
            if (!first) out += ',';
            out += name;
            first = false;
        }
        out += '\n';
    }
    return out;
}

inline std::string to_fasta(const data::Dataset& dataset) {
    std::string out;
    for (int i = 0; i < dataset.proteins.size(); ++i) {
        if (!dataset.proteins.sequence(i)) continue;
        out += '>';
        out += dataset.proteins.id_of(i);
        out += '\n';
        out += *dataset.proteins.sequence(i);
        out += '\n';
    }
    return out;
}

}  // namespace ppibench::testsupport
