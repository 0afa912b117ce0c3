#pragma once

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ppibench/dataset.hpp"
#include "ppibench/rng.hpp"

namespace ppibench::partition {

enum class Scheme { Random, BFS, DFS };
enum class Stratum { BS, ES, NS };

std::string to_string(Scheme scheme);
std::string to_string(Stratum stratum);
std::optional<Scheme> scheme_from_string(std::string_view name);

struct PartitionConfig {
    Scheme scheme = Scheme::Random;
    double test_fraction = 0.2;
    int root_degree_threshold = 5;  // t: roots need degree in [1, t)
    uint64_t seed = 0;

    void validate(int64_t edge_count) const;
    int64_t testset_size(int64_t edge_count) const;  // N = round(fraction * M)
};

struct PartitionResult {
    Scheme scheme = Scheme::Random;
    double test_fraction = 0.2;
    int root_degree_threshold = 5;
    uint64_t seed = 0;

    std::vector<int> root_ids;     // roots drawn, in order (empty for Random)
    std::vector<int> train_edges;  // ascending edge ids
    std::vector<int> test_edges;   // ascending edge ids
    std::vector<int> seen;         // P_v: endpoints of train edges
    std::vector<int> unseen;       // P_u = P - P_v
    std::vector<Stratum> strata;   // parallel to test_edges
};

/// Picks a root uniformly among nodes with degree in [1, t).
int select_root(const data::PpiGraph& graph, int t, Rng& rng);

struct SearchState {
    Scheme scheme = Scheme::BFS;
    std::vector<char> visited;
    std::deque<int> frontier;  // BFS: discovered-but-unvisited, FIFO
    std::vector<int> path;     // DFS: current path for backtracking
    std::vector<char> discovered;
};

SearchState init_search(const data::PpiGraph& graph, int root, Scheme scheme);

/// Next protein in the traversal, or nullopt once the reachable component
/// is exhausted. BFS pops a FIFO frontier; DFS descends to the smallest
/// unvisited neighbor and backtracks along its path.
std::optional<int> search_next(const data::PpiGraph& graph, SearchState& state);

PartitionResult make_partition(const data::PpiGraph& graph, const PartitionConfig& config, Rng& rng);
PartitionResult make_partition(const data::PpiGraph& graph, const PartitionConfig& config);

struct StrataReport {
    std::vector<int> bs, es, ns;       // test edge ids per stratum
    double p_bs = 0, p_es = 0, p_ns = 0;
};

StrataReport stratify(const PartitionResult& result);

struct ProteinProportions {
    std::vector<int> trainset_only, testset_only, both;
    double p_train_only = 0, p_test_only = 0, p_both = 0;  // over proteins with >=1 edge
};

ProteinProportions protein_proportions(const data::PpiGraph& graph, const PartitionResult& result);

nlohmann::json manifest_to_json(const PartitionResult& result);
/// Rebuilds a full PartitionResult from a manifest; recomputes the train
/// side and P_v/P_u from the graph and cross-checks the stored strata.
PartitionResult manifest_from_json(const data::PpiGraph& graph, const nlohmann::json& j);
PartitionResult load_manifest(const data::PpiGraph& graph, const std::string& path);
void save_manifest(const PartitionResult& result, const std::string& path);

}  // namespace ppibench::partition
