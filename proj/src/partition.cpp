#include "ppibench/partition.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ppibench::partition {

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::Random: return "random";
        case Scheme::BFS: return "bfs";
        case Scheme::DFS: return "dfs";
    }
    return "?";
}

std::string to_string(Stratum stratum) {
    switch (stratum) {
        case Stratum::BS: return "BS";
        case Stratum::ES: return "ES";
        case Stratum::NS: return "NS";
    }
    return "?";
}

std::optional<Scheme> scheme_from_string(std::string_view name) {
    std::string s(name);
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "random") return Scheme::Random;
    if (s == "bfs") return Scheme::BFS;
    if (s == "dfs") return Scheme::DFS;
    return std::nullopt;
}

void PartitionConfig::validate(int64_t edge_count) const {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::runtime_error("test_fraction must be in (0, 1)");
    }
    if (root_degree_threshold < 1) throw std::runtime_error("root degree threshold t must be >= 1");
    if (testset_size(edge_count) < 1) {
        throw std::runtime_error("test_fraction * edge_count must be >= 1 (got N=0)");
    }
}

int64_t PartitionConfig::testset_size(int64_t edge_count) const {
    return std::llround(test_fraction * static_cast<double>(edge_count));
}

namespace {

int select_root_excluding(const data::PpiGraph& graph, int t, Rng& rng, const std::vector<char>* exclude) {
    std::vector<int> eligible;
    for (int p = 0; p < graph.n; ++p) {
        if (exclude && (*exclude)[p]) continue;
        int d = graph.degree(p);
        if (d >= 1 && d < t) eligible.push_back(p);
    }
    if (eligible.empty()) {
        throw std::runtime_error("no eligible root node with degree in [1, " + std::to_string(t) +
                                 "); raise the root degree threshold t");
    }
    return eligible[rng.below(eligible.size())];
}

}  // namespace

int select_root(const data::PpiGraph& graph, int t, Rng& rng) {
    return select_root_excluding(graph, t, rng, nullptr);
}

SearchState init_search(const data::PpiGraph& graph, int root, Scheme scheme) {
    if (scheme == Scheme::Random) throw std::runtime_error("search is only defined for BFS/DFS");
    SearchState state;
    state.scheme = scheme;
    state.visited.assign(graph.n, 0);
    state.discovered.assign(graph.n, 0);
    state.visited[root] = 1;
    state.discovered[root] = 1;
    if (scheme == Scheme::BFS) {
        for (const auto& [v, e] : graph.adjacency[root]) {
            if (!state.discovered[v]) {
                state.discovered[v] = 1;
                state.frontier.push_back(v);
            }
        }
    } else {
        state.path.push_back(root);
    }
    return state;
}

std::optional<int> search_next(const data::PpiGraph& graph, SearchState& state) {
    if (state.scheme == Scheme::BFS) {
        if (state.frontier.empty()) return std::nullopt;
        int v = state.frontier.front();
        state.frontier.pop_front();
        state.visited[v] = 1;
        for (const auto& [w, e] : graph.adjacency[v]) {
            if (!state.discovered[w]) {
                state.discovered[w] = 1;
                state.frontier.push_back(w);
            }
        }
        return v;
    }
    // DFS: descend to the smallest unvisited neighbor, backtrack when stuck
    while (!state.path.empty()) {
        int cur = state.path.back();
        int next = -1;
        for (const auto& [w, e] : graph.adjacency[cur]) {
            if (!state.visited[w]) { next = w; break; }  // adjacency is sorted
        }
        if (next >= 0) {
            state.visited[next] = 1;
            state.path.push_back(next);
            return next;
        }
        state.path.pop_back();
    }
    return std::nullopt;
}

namespace {

void finalize(const data::PpiGraph& graph, const std::vector<char>& in_test, PartitionResult& result) {
    std::vector<char> seen(graph.n, 0);
    for (int p = 0; p < graph.n; ++p) {
        for (const auto& [v, e] : graph.adjacency[p]) {
            if (!in_test[e]) { seen[p] = 1; break; }
        }
    }
    for (size_t e = 0; e < in_test.size(); ++e) {
        (in_test[e] ? result.test_edges : result.train_edges).push_back(static_cast<int>(e));
    }
    for (int p = 0; p < graph.n; ++p) (seen[p] ? result.seen : result.unseen).push_back(p);

    // endpoint lookup per test edge
    std::vector<std::pair<int, int>> ends(in_test.size(), {-1, -1});
    for (int p = 0; p < graph.n; ++p) {
        for (const auto& [v, e] : graph.adjacency[p]) {
            if (p < v) ends[e] = {p, v};
        }
    }
    result.strata.reserve(result.test_edges.size());
    for (int e : result.test_edges) {
        auto [a, b] = ends[e];
        int seen_count = (seen[a] ? 1 : 0) + (seen[b] ? 1 : 0);
        result.strata.push_back(seen_count == 2 ? Stratum::BS : seen_count == 1 ? Stratum::ES : Stratum::NS);
    }
}

}  // namespace

PartitionResult make_partition(const data::PpiGraph& graph, const PartitionConfig& config, Rng& rng) {
    const int64_t m = graph.edge_count;
    config.validate(m);
    const int64_t n_test = config.testset_size(m);

    PartitionResult result;
    result.scheme = config.scheme;
    result.test_fraction = config.test_fraction;
    result.root_degree_threshold = config.root_degree_threshold;
    result.seed = config.seed;

    std::vector<char> in_test(m, 0);
    int64_t test_count = 0;

    if (config.scheme == Scheme::Random) {
        if (n_test >= m) throw std::runtime_error("random partition would leave an empty trainset");
        std::vector<int> ids(m);
        for (int64_t i = 0; i < m; ++i) ids[i] = static_cast<int>(i);
        // partial Fisher-Yates: first n_test entries are the sample
        for (int64_t i = 0; i < n_test; ++i) {
            int64_t j = i + static_cast<int64_t>(rng.below(static_cast<uint64_t>(m - i)));
            std::swap(ids[i], ids[j]);
        }
        for (int64_t i = 0; i < n_test; ++i) in_test[ids[i]] = 1;
        test_count = n_test;
    } else {
        std::vector<char> visited_any(graph.n, 0);
        auto take_edges = [&](int p) {
            for (const auto& [v, e] : graph.adjacency[p]) {
                if (!in_test[e]) { in_test[e] = 1; ++test_count; }
            }
        };
        while (test_count < n_test) {
            int root;
            try {
                root = select_root_excluding(graph, config.root_degree_threshold, rng, &visited_any);
            } catch (const std::runtime_error&) {
                throw std::runtime_error("testset size " + std::to_string(n_test) +
                                         " unreachable: all components with eligible roots are exhausted");
            }
            result.root_ids.push_back(root);
            SearchState state = init_search(graph, root, config.scheme);
            visited_any[root] = 1;
            take_edges(root);
            while (test_count < n_test) {
                auto next = search_next(graph, state);
                if (!next) break;  // component exhausted; draw a fresh root
                visited_any[*next] = 1;
                take_edges(*next);
            }
        }
        if (test_count >= m) throw std::runtime_error("search consumed every edge, leaving an empty trainset");
    }

    finalize(graph, in_test, result);
    return result;
}

PartitionResult make_partition(const data::PpiGraph& graph, const PartitionConfig& config) {
    Rng rng(config.seed);
    return make_partition(graph, config, rng);
}

StrataReport stratify(const PartitionResult& result) {
    if (result.test_edges.empty()) throw std::runtime_error("empty testset");
    StrataReport report;
    for (size_t i = 0; i < result.test_edges.size(); ++i) {
        switch (result.strata[i]) {
            case Stratum::BS: report.bs.push_back(result.test_edges[i]); break;
            case Stratum::ES: report.es.push_back(result.test_edges[i]); break;
            case Stratum::NS: report.ns.push_back(result.test_edges[i]); break;
        }
    }
    const double total = static_cast<double>(result.test_edges.size());
    report.p_bs = report.bs.size() / total;
    report.p_es = report.es.size() / total;
    report.p_ns = report.ns.size() / total;
    return report;
}

ProteinProportions protein_proportions(const data::PpiGraph& graph, const PartitionResult& result) {
    std::vector<char> in_test(graph.edge_count, 0);
    for (int e : result.test_edges) in_test[e] = 1;

    ProteinProportions out;
    int64_t classified = 0;
    for (int p = 0; p < graph.n; ++p) {
        if (graph.adjacency[p].empty()) continue;
        bool has_train = false, has_test = false;
        for (const auto& [v, e] : graph.adjacency[p]) (in_test[e] ? has_test : has_train) = true;
        ++classified;
        if (has_train && has_test) out.both.push_back(p);
        else if (has_train) out.trainset_only.push_back(p);
        else out.testset_only.push_back(p);
    }
    if (classified > 0) {
        out.p_train_only = out.trainset_only.size() / static_cast<double>(classified);
        out.p_test_only = out.testset_only.size() / static_cast<double>(classified);
        out.p_both = out.both.size() / static_cast<double>(classified);
    }
    return out;
}

nlohmann::json manifest_to_json(const PartitionResult& result) {
    StrataReport report;
    for (size_t i = 0; i < result.test_edges.size(); ++i) {
        switch (result.strata[i]) {
            case Stratum::BS: report.bs.push_back(result.test_edges[i]); break;
            case Stratum::ES: report.es.push_back(result.test_edges[i]); break;
            case Stratum::NS: report.ns.push_back(result.test_edges[i]); break;
        }
    }
    return {{"scheme", to_string(result.scheme)},
            {"seed", result.seed},
            {"t", result.root_degree_threshold},
            {"test_fraction", result.test_fraction},
            {"root_ids", result.root_ids},
            {"test_edge_ids", result.test_edges},
            {"strata", {{"BS", report.bs}, {"ES", report.es}, {"NS", report.ns}}}};
}

PartitionResult manifest_from_json(const data::PpiGraph& graph, const nlohmann::json& j) {
    PartitionResult result;
    auto scheme = scheme_from_string(j.at("scheme").get<std::string>());
    if (!scheme) throw std::runtime_error("manifest: unknown scheme '" + j.at("scheme").get<std::string>() + "'");
    result.scheme = *scheme;
    result.seed = j.at("seed").get<uint64_t>();
    result.root_degree_threshold = j.at("t").get<int>();
    result.test_fraction = j.at("test_fraction").get<double>();
    result.root_ids = j.at("root_ids").get<std::vector<int>>();

    std::vector<char> in_test(graph.edge_count, 0);
    for (int id : j.at("test_edge_ids")) {
        if (id < 0 || id >= graph.edge_count) throw std::runtime_error("manifest: test edge id out of range");
        if (in_test[id]) throw std::runtime_error("manifest: duplicate test edge id");
        in_test[id] = 1;
    }
    finalize(graph, in_test, result);

    // cross-check the stored strata against the recomputed ones
    const auto& strata = j.at("strata");
    for (const char* key : {"BS", "ES", "NS"}) {
        Stratum want = key[0] == 'B' ? Stratum::BS : key[0] == 'E' ? Stratum::ES : Stratum::NS;
        for (int e : strata.at(key)) {
            auto it = std::lower_bound(result.test_edges.begin(), result.test_edges.end(), e);
            if (it == result.test_edges.end() || *it != e) {
                throw std::runtime_error("manifest: stratum lists an edge that is not in the testset");
            }
            size_t idx = static_cast<size_t>(it - result.test_edges.begin());
            if (result.strata[idx] != want) {
                throw std::runtime_error("manifest: stored strata disagree with the graph (edge " +
                                         std::to_string(e) + ")");
            }
        }
    }
    return result;
}

PartitionResult load_manifest(const data::PpiGraph& graph, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest file: " + path);
    nlohmann::json j;
    in >> j;
    return manifest_from_json(graph, j);
}

void save_manifest(const PartitionResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest file: " + path);
    out << manifest_to_json(result).dump(2) << '\n';
}

}  // namespace ppibench::partition
