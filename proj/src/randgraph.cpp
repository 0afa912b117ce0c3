#include "ppibench/randgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ppibench/partition.hpp"

namespace ppibench::randgraph {

double connectivity_threshold(int n) {
    if (n < 2) throw std::runtime_error("connectivity threshold needs n >= 2");
    return (n - 1) * std::log(static_cast<double>(n)) / 2.0;
}

data::PpiGraph gen_gnp(int n, double p, Rng& rng) {
    if (n < 1) throw std::runtime_error("gnp: n must be >= 1");
    if (p < 0.0 || p > 1.0) throw std::runtime_error("gnp: p must be in [0, 1]");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.bernoulli(p)) edges.emplace_back(i, j);
        }
    }
    return data::graph_from_pairs(n, edges);
}

data::PpiGraph gen_gnm(int n, int64_t m, Rng& rng) {
    if (n < 1) throw std::runtime_error("gnm: n must be >= 1");
    const int64_t max_edges = static_cast<int64_t>(n) * (n - 1) / 2;
    if (m < 0 || m > max_edges) {
        throw std::runtime_error("gnm: M must be in [0, n(n-1)/2] = [0, " + std::to_string(max_edges) + "]");
    }
    // rejection of duplicate pairs: exact-uniform, cheap while M << C(n,2);
    // degenerates near density 1 where almost every draw collides
    std::unordered_set<uint64_t> seen;
    seen.reserve(static_cast<size_t>(m) * 2);
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<size_t>(m));
    while (static_cast<int64_t>(edges.size()) < m) {
        int a = rng.below_int(n);
        int b = rng.below_int(n);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        uint64_t key = (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
        if (seen.insert(key).second) edges.emplace_back(a, b);
    }
    return data::graph_from_pairs(n, edges);
}

bool is_connected(const data::PpiGraph& graph) {
    if (graph.n <= 1) return true;
    for (int p = 0; p < graph.n; ++p) {
        if (graph.adjacency[p].empty()) return false;  // isolated node
    }
    std::vector<char> reached(graph.n, 0);
    std::vector<int> stack{0};
    reached[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& [w, e] : graph.adjacency[v]) {
            if (!reached[w]) {
                reached[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == graph.n;
}

TrialResult er_strata_trial(const data::PpiGraph& graph, double test_fraction, Rng& rng) {
    partition::PartitionConfig config;
    config.scheme = partition::Scheme::Random;
    config.test_fraction = test_fraction;
    config.seed = rng.seed();
    auto result = partition::make_partition(graph, config, rng);
    auto report = partition::stratify(result);

    TrialResult trial;
    trial.bs = report.p_bs;
    trial.es = report.p_es;
    trial.ns = report.p_ns;
    trial.edges = graph.edge_count;

    std::vector<std::pair<int, int>> train_pairs;
    train_pairs.reserve(result.train_edges.size());
    std::vector<char> in_train(graph.edge_count, 0);
    for (int e : result.train_edges) in_train[e] = 1;
    for (int p = 0; p < graph.n; ++p) {
        for (const auto& [v, e] : graph.adjacency[p]) {
            if (p < v && in_train[e]) train_pairs.emplace_back(p, v);
        }
    }
    trial.train_connected = is_connected(data::graph_from_pairs(graph.n, train_pairs));

    for (int p = 0; p < graph.n; ++p) {
        if (graph.degree(p) == 1) ++trial.degree_one_nodes;
    }
    return trial;
}

namespace {

int worker_count(int trials) {
    unsigned hw = std::thread::hardware_concurrency();
    int threads = hw == 0 ? 1 : static_cast<int>(hw);
    if (const char* cap = std::getenv("PPI_BENCH_THREADS")) {
        int v = std::atoi(cap);
        if (v >= 1) threads = std::min(threads, v);
    }
    return std::max(1, std::min(threads, trials));
}

}  // namespace

ErStrataReport er_strata_experiment(const ErConfig& config, double test_fraction) {
    if (config.trials < 1) throw std::runtime_error("trials must be >= 1");
    if (config.n < 2) throw std::runtime_error("n must be >= 2");
    if (config.p.has_value() == config.m.has_value()) {
        throw std::runtime_error("exactly one of p / M must be set");
    }

    ErStrataReport report;
    report.config = config;
    report.test_fraction = test_fraction;
    report.threshold_m = connectivity_threshold(config.n);
    report.trials.resize(config.trials);

    Rng base(config.seed);
    auto run_trial = [&](int t) {
        Rng trial_rng = base.fork(static_cast<uint64_t>(t));
        int rejected = 0;
        data::PpiGraph graph;
        for (int attempt = 0;; ++attempt) {
            Rng gen_rng = trial_rng.fork(2 * attempt);
            graph = config.m ? gen_gnm(config.n, *config.m, gen_rng)
                             : gen_gnp(config.n, *config.p, gen_rng);
            if (is_connected(graph)) break;
            ++rejected;
            if (attempt > 1000) throw std::runtime_error("could not generate a connected graph in 1000 attempts");
        }
        Rng part_rng = trial_rng.fork(1);
        report.trials[t] = er_strata_trial(graph, test_fraction, part_rng);
        report.trials[t].regenerated = rejected;
    };

    const int threads = worker_count(config.trials);
    if (threads == 1) {
        for (int t = 0; t < config.trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    for (int t = w; t < config.trials; t += threads) run_trial(t);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
    }

    double sum = 0, sum_sq = 0;
    for (const auto& t : report.trials) {
        sum += t.bs;
        sum_sq += t.bs * t.bs;
        report.mean_es += t.es;
        report.mean_ns += t.ns;
        report.train_connected_rate += t.train_connected ? 1.0 : 0.0;
        report.mean_degree_one += t.degree_one_nodes;
        report.regenerated_total += t.regenerated;
    }
    const double k = static_cast<double>(config.trials);
    report.mean_bs = sum / k;
    report.mean_es /= k;
    report.mean_ns /= k;
    report.train_connected_rate /= k;
    report.mean_degree_one /= k;
    double var = sum_sq / k - report.mean_bs * report.mean_bs;
    report.std_bs = var > 0 ? std::sqrt(var) : 0.0;
    return report;
}

nlohmann::json report_to_json(const ErStrataReport& report) {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : report.trials) {
        trials.push_back({{"BS", t.bs},
                          {"ES", t.es},
                          {"NS", t.ns},
                          {"train_connected", t.train_connected},
                          {"edges", t.edges},
                          {"degree_one_nodes", t.degree_one_nodes},
                          {"regenerated", t.regenerated}});
    }
    nlohmann::json model = {{"n", report.config.n}, {"trials", report.config.trials}, {"seed", report.config.seed}};
    if (report.config.m) model["M"] = *report.config.m;
    if (report.config.p) model["p"] = *report.config.p;
    return {{"model", std::move(model)},
            {"test_fraction", report.test_fraction},
            {"threshold_m", report.threshold_m},
            {"mean_bs", report.mean_bs},
            {"std_bs", report.std_bs},
            {"mean_es", report.mean_es},
            {"mean_ns", report.mean_ns},
            {"train_connected_rate", report.train_connected_rate},
            {"mean_degree_one", report.mean_degree_one},
            {"regenerated_total", report.regenerated_total},
            {"trials", std::move(trials)}};
}

}  // namespace ppibench::randgraph
