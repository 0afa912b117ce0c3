#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ppibench/eval.hpp"
#include "ppibench/model.hpp"
#include "ppibench/skipgram.hpp"
#include "toyset.hpp"

using namespace ppibench;
using eval::Probs;

namespace {

data::LabelSet bits(std::initializer_list<int> idx) {
    data::LabelSet s;
    for (int i : idx) s.set(i);
    return s;
}

std::array<double, 7> row(std::initializer_list<int> idx) {
    std::array<double, 7> r{};
    r.fill(0.1);
    for (int i : idx) r[i] = 0.9;
    return r;
}

// brute-force scalar oracle over every (sample, label) cell
double oracle_micro_f1(const Probs& p, const std::vector<data::LabelSet>& y, double threshold) {
    long long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < p.size(); ++i) {
        for (int k = 0; k < 7; ++k) {
            const bool truth = y[i].has(k);
            const bool pred = p[i][k] >= threshold;
            if (truth && pred) ++tp;
            else if (pred) ++fp;
            else if (truth) ++fn;
        }
    }
    const long long denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
}

}  // namespace

TEST_CASE("micro_f1 worked examples") {
    const int binding = *data::label_index("binding");
    const int reaction = *data::label_index("reaction");

    SUBCASE("perfect predictions") {
        Probs p{row({binding}), row({reaction, binding})};
        std::vector<data::LabelSet> y{bits({binding}), bits({reaction, binding})};
        CHECK(eval::micro_f1(p, y) == doctest::Approx(1.0));
    }
    SUBCASE("hand-pooled counts give 2/3") {
        Probs p{row({binding, reaction}), row({reaction})};
        std::vector<data::LabelSet> y{bits({binding}), bits({reaction, binding})};
        // TP=2 (s1 binding, s2 reaction), FP=1 (s1 reaction), FN=1 (s2 binding)
        CHECK(eval::micro_f1(p, y) == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
    }
    SUBCASE("all-zero predictions on non-empty labels") {
        Probs p{{}};
        p[0].fill(0.0);
        std::vector<data::LabelSet> y{bits({binding})};
        CHECK(eval::micro_f1(p, y) == doctest::Approx(0.0));
    }
    SUBCASE("empty batch errors") {
        CHECK_THROWS(eval::micro_f1({}, {}));
    }
}

TEST_CASE("micro_f1 equals the scalar oracle on 100 random batches") {
    Rng rng(23);
    for (int round = 0; round < 100; ++round) {
        const int n = 1 + rng.below_int(40);
        Probs p(n);
        std::vector<data::LabelSet> y(n);
        for (int i = 0; i < n; ++i) {
            uint8_t mask = 0;
            for (int k = 0; k < 7; ++k) {
                p[i][k] = rng.real01();
                if (rng.bernoulli(0.4)) mask |= uint8_t(1) << k;
            }
            if (mask == 0) mask = 1;
            y[i] = data::LabelSet(mask);
        }
        const double threshold = 0.2 + 0.6 * rng.real01();
        CHECK(eval::micro_f1(p, y, threshold) == oracle_micro_f1(p, y, threshold));
    }
}

TEST_CASE("pooled per-type counts reproduce micro-F1") {
    Rng rng(29);
    for (int round = 0; round < 20; ++round) {
        const int n = 5 + rng.below_int(30);
        Probs p(n);
        std::vector<data::LabelSet> y(n);
        for (int i = 0; i < n; ++i) {
            uint8_t mask = 0;
            for (int k = 0; k < 7; ++k) {
                p[i][k] = rng.real01();
                if (rng.bernoulli(0.3)) mask |= uint8_t(1) << k;
            }
            if (mask == 0) mask = 2;
            y[i] = data::LabelSet(mask);
        }
        auto per_type = eval::per_type_f1(p, y);
        long long tp = 0, fp = 0, fn = 0;
        for (const auto& s : per_type) {
            tp += s.tp;
            fp += s.fp;
            fn += s.fn;
        }
        const double pooled = 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
        CHECK(std::abs(pooled - eval::micro_f1(p, y)) < 1e-9);
    }
}

TEST_CASE("per_type_f1 flags") {
    const int binding = *data::label_index("binding");
    Probs p{row({binding}), row({binding})};
    std::vector<data::LabelSet> y{bits({binding}), bits({binding})};
    auto scores = eval::per_type_f1(p, y);
    CHECK(scores[binding].f1 == doctest::Approx(1.0));
    CHECK(scores[binding].defined);
    // a label never predicted nor present is undefined, f1 = 0
    const int expression = *data::label_index("expression");
    CHECK(scores[expression].f1 == doctest::Approx(0.0));
    CHECK(!scores[expression].defined);

    // present in truth but never predicted -> defined, 0.0
    std::vector<data::LabelSet> y2{bits({binding, expression}), bits({binding})};
    auto scores2 = eval::per_type_f1(p, y2);
    CHECK(scores2[expression].f1 == doctest::Approx(0.0));
    CHECK(scores2[expression].defined);
}

TEST_CASE("threshold monotonicity: raising it never raises TP") {
    Rng rng(37);
    Probs p(30);
    std::vector<data::LabelSet> y(30);
    for (int i = 0; i < 30; ++i) {
        uint8_t mask = 0;
        for (int k = 0; k < 7; ++k) {
            p[i][k] = rng.real01();
            if (rng.bernoulli(0.5)) mask |= uint8_t(1) << k;
        }
        if (!mask) mask = 4;
        y[i] = data::LabelSet(mask);
    }
    long long prev_tp = -1;
    for (double threshold : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        auto scores = eval::per_type_f1(p, y, threshold);
        long long tp = 0;
        for (const auto& s : scores) tp += s.tp;
        if (prev_tp >= 0) CHECK(tp <= prev_tp);
        prev_tp = tp;
    }
}

TEST_CASE("score_stratified") {
    using partition::Stratum;
    const int binding = *data::label_index("binding");

    SUBCASE("perfect model scores 1.0 in every present stratum") {
        Probs p{row({binding}), row({binding}), row({binding})};
        std::vector<data::LabelSet> y{bits({binding}), bits({binding}), bits({binding})};
        std::vector<Stratum> strata{Stratum::ES, Stratum::NS, Stratum::ES};
        auto report = eval::score_stratified(p, y, strata);
        CHECK(report.strata.at("ES").micro_f1 == doctest::Approx(1.0));
        CHECK(report.strata.at("NS").micro_f1 == doctest::Approx(1.0));
        CHECK(report.strata.at("Avg").micro_f1 == doctest::Approx(1.0));
        CHECK(report.strata.count("BS") == 0);  // absent, not zero
    }
    SUBCASE("Avg pools cells; it is not the mean of per-stratum scores") {
        // ES: perfect on 1 edge; NS: poor on 3 edges
        Probs p{row({binding}), row({}), row({}), row({})};
        std::vector<data::LabelSet> y{bits({binding}), bits({binding}), bits({binding}),
                                      bits({binding})};
        std::vector<Stratum> strata{Stratum::ES, Stratum::NS, Stratum::NS, Stratum::NS};
        auto report = eval::score_stratified(p, y, strata);
        const double pooled = oracle_micro_f1(p, y, 0.5);
        CHECK(report.strata.at("Avg").micro_f1 == doctest::Approx(pooled));
        const double mean_of_strata =
            (report.strata.at("ES").micro_f1 + report.strata.at("NS").micro_f1) / 2;
        CHECK(report.strata.at("Avg").micro_f1 != doctest::Approx(mean_of_strata));
        CHECK(report.strata.at("ES").proportion == doctest::Approx(0.25));
    }
}

TEST_CASE("stratified_eval and cross_eval on a trained toy checkpoint") {
    auto dataset = testsupport::make_toy_dataset();
    auto graph = data::build_graph(dataset.interactions, dataset.proteins.size());
    std::vector<std::string> seqs;
    for (int i = 0; i < dataset.proteins.size(); ++i) seqs.push_back(*dataset.proteins.sequence(i));
    features::SkipGramConfig sg;
    sg.seed = 11;
    auto embedding = features::train_skipgram(seqs, sg);

    partition::PartitionConfig pc;
    pc.scheme = partition::Scheme::BFS;
    pc.test_fraction = 0.2;
    pc.root_degree_threshold = 5;
    pc.seed = 41;
    auto part = partition::make_partition(graph, pc);

    model::TrainConfig config;
    config.apply_desk_scale();
    config.epochs = 12;
    config.seed = 1;
    config.graph_mode = model::GraphMode::GCA;
    auto result = model::train(dataset, graph, part, &embedding, config);

    auto report = eval::stratified_eval(result.checkpoint, dataset, graph, part);
    CHECK(report.evaluated_edges == static_cast<int64_t>(part.test_edges.size()));
    CHECK(report.strata.count("BS") == 0);  // BFS partitions have no BS stratum
    CHECK(report.strata.count("Avg") == 1);
    CHECK(report.micro_f1 >= 0.0);
    CHECK(report.micro_f1 <= 1.0);

    SUBCASE("cross_eval on the training dataset itself reproduces stratified_eval") {
        auto cross = eval::cross_eval(result.checkpoint, dataset, part, dataset);
        CHECK(cross.evaluated_edges == report.evaluated_edges);
        CHECK(cross.excluded_edges == static_cast<int64_t>(part.train_edges.size()));
        CHECK(cross.micro_f1 == doctest::Approx(report.micro_f1));
        for (const auto& [name, s] : report.strata) {
            REQUIRE(cross.strata.count(name) == 1);
            CHECK(cross.strata.at(name).micro_f1 == doctest::Approx(s.micro_f1));
        }
    }

    SUBCASE("NS-heavy superset shifts the strata") {
        // dataset B = A plus extra proteins chained to each other (never seen in A)
        data::Dataset b;
        for (int i = 0; i < dataset.proteins.size(); ++i) {
            b.proteins.add(dataset.proteins.id_of(i));
            b.proteins.set_sequence(i, *dataset.proteins.sequence(i));
        }
        for (const auto& e : dataset.interactions.edges()) b.interactions.add(e.a, e.b, e.labels);
        Rng rng(5);
        const char alphabet[] = "ARNDQEGILKFPSTYV";
        int prev = -1;
        for (int k = 0; k < 12; ++k) {
            int idx = b.proteins.add("NEW" + std::to_string(k));
            std::string seq(45, 'A');
            for (char& c : seq) c = alphabet[rng.below_int(16)];
            b.proteins.set_sequence(idx, seq);
            if (prev >= 0) b.interactions.add(prev, idx, data::LabelSet::single(1));
            prev = idx;
        }
        auto cross_b = eval::cross_eval(result.checkpoint, dataset, part, b);
        auto cross_a = eval::cross_eval(result.checkpoint, dataset, part, dataset);
        CHECK(cross_b.strata.at("NS").proportion > cross_a.strata.at("NS").proportion);
    }

    SUBCASE("cross_eval with nothing left errors") {
        // B = exactly A's train edges
        data::Dataset b;
        for (int i = 0; i < dataset.proteins.size(); ++i) {
            b.proteins.add(dataset.proteins.id_of(i));
            b.proteins.set_sequence(i, *dataset.proteins.sequence(i));
        }
        for (int e : part.train_edges) {
            const auto& edge = dataset.interactions.edges()[e];
            b.interactions.add(edge.a, edge.b, edge.labels);
        }
        CHECK_THROWS(eval::cross_eval(result.checkpoint, dataset, part, b));
    }
}

TEST_CASE("a saturated checkpoint yields an all-1.0 report") {
    // single-label dataset: the bias-only solution is perfect, so a short
    // training run produces a checkpoint that scores 1.0 in every stratum
    data::Dataset dataset;
    Rng rng(13);
    const char alphabet[] = "ARNDQEGILKFPSTYV";
    const int n = 14;
    for (int i = 0; i < n; ++i) {
        int idx = dataset.proteins.add("S" + std::to_string(i));
        std::string seq(36, 'A');
        for (char& c : seq) c = alphabet[rng.below_int(16)];
        dataset.proteins.set_sequence(idx, seq);
    }
    for (int i = 0; i < n; ++i) {
        dataset.interactions.add(i, (i + 1) % n, data::LabelSet::single(1));
        if (i + 3 < n) dataset.interactions.add(i, i + 3, data::LabelSet::single(1));
    }
    auto graph = data::build_graph(dataset.interactions, n);

    std::vector<std::string> seqs;
    for (int i = 0; i < n; ++i) seqs.push_back(*dataset.proteins.sequence(i));
    features::SkipGramConfig sg;
    sg.seed = 2;
    auto embedding = features::train_skipgram(seqs, sg);

    partition::PartitionConfig pc;
    pc.scheme = partition::Scheme::Random;
    pc.test_fraction = 0.2;
    pc.seed = 6;
    auto part = partition::make_partition(graph, pc);

    model::TrainConfig config;
    config.apply_desk_scale();
    config.epochs = 40;
    config.seed = 4;
    auto result = model::train(dataset, graph, part, &embedding, config);

    auto report = eval::stratified_eval(result.checkpoint, dataset, graph, part);
    CHECK(report.micro_f1 == doctest::Approx(1.0));
    for (const auto& [name, s] : report.strata) {
        CHECK_MESSAGE(s.micro_f1 == doctest::Approx(1.0), name);
    }
}

TEST_CASE("report JSON and CSV") {
    const int binding = *data::label_index("binding");
    Probs p{row({binding}), row({binding})};
    std::vector<data::LabelSet> y{bits({binding}), bits({binding})};
    std::vector<partition::Stratum> strata{partition::Stratum::ES, partition::Stratum::NS};
    auto report = eval::score_stratified(p, y, strata);

    auto j = eval::report_to_json(report);
    CHECK(j["micro_f1"].get<double>() == doctest::Approx(1.0));
    CHECK(j["strata"].contains("ES"));
    CHECK(!j["strata"].contains("BS"));
    CHECK(j["per_type"]["binding"]["f1"].get<double>() == doctest::Approx(1.0));

    const std::string path = "eval_report_test.csv";
    eval::write_report_csv(report, path);
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "stratum,label,f1,tp,fp,fn");
    in.close();
    std::remove(path.c_str());
}
