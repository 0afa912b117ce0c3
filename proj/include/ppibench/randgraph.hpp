#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ppibench/dataset.hpp"
#include "ppibench/rng.hpp"

namespace ppibench::randgraph {

/// M' = (n-1) ln(n) / 2; edge counts above this make G(n, M) almost
/// surely connected.
double connectivity_threshold(int n);

data::PpiGraph gen_gnp(int n, double p, Rng& rng);
data::PpiGraph gen_gnm(int n, int64_t m, Rng& rng);

bool is_connected(const data::PpiGraph& graph);

struct ErConfig {
    int n = 0;
    std::optional<double> p;   // exactly one of p / m set
    std::optional<int64_t> m;
    int trials = 0;
    uint64_t seed = 0;
};

struct TrialResult {
    double bs = 0, es = 0, ns = 0;  // strata proportions of the testset
    bool train_connected = false;   // trainset graph over all n nodes
    int64_t edges = 0;
    int degree_one_nodes = 0;
    int regenerated = 0;  // disconnected graphs rejected before this trial ran
};

struct ErStrataReport {
    ErConfig config;
    double test_fraction = 0.2;
    std::vector<TrialResult> trials;
    double mean_bs = 0, std_bs = 0;
    double mean_es = 0, mean_ns = 0;
    double train_connected_rate = 0;
    double threshold_m = 0;  // M'(n)
    double mean_degree_one = 0;
    int regenerated_total = 0;
};

/// One partition trial on an already-generated graph: Random split at
/// test_fraction, strata proportions, trainset-graph connectivity.
TrialResult er_strata_trial(const data::PpiGraph& graph, double test_fraction, Rng& rng);

/// Generates connected G(n,M) (or G(n,p)) graphs and measures how the
/// Random partition strata behave across trials. Trials run in parallel
/// (capped by PPI_BENCH_THREADS) with per-trial derived seeds, so the
/// report does not depend on the thread count.
ErStrataReport er_strata_experiment(const ErConfig& config, double test_fraction);

nlohmann::json report_to_json(const ErStrataReport& report);

}  // namespace ppibench::randgraph
