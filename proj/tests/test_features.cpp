#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "ppibench/features.hpp"
#include "ppibench/rng.hpp"
#include "ppibench/skipgram.hpp"

using namespace ppibench;

TEST_CASE("amino-acid classes") {
    CHECK(features::aa_class('K') == 5);
    CHECK(features::aa_class('R') == 5);
    CHECK(features::aa_class('C') == 7);
    CHECK(features::aa_class('X') == 8);
    CHECK(features::aa_class('U') == 8);
    CHECK(features::aa_class('O') == 8);
    CHECK(features::aa_class('B') == 8);  // non-standard letter
    CHECK_THROWS(features::aa_class('1'));
    CHECK_THROWS(features::aa_class('k'));

    // the 7 real classes cover the 20 standard residues exactly
    std::array<int, 9> counts{};
    for (char c : features::kStandardResidues) ++counts[features::aa_class(c)];
    CHECK(counts[8] == 0);
    int total = 0;
    for (int k = 1; k <= 7; ++k) {
        CHECK(counts[k] >= 1);
        total += counts[k];
    }
    CHECK(total == 20);
}

TEST_CASE("CTD attribute classes partition the standard residues") {
    for (int attr = 0; attr < features::kCtdAttributes; ++attr) {
        std::array<int, 4> counts{};
        for (char c : features::kStandardResidues) ++counts[features::ctd_class(attr, c)];
        CHECK(counts[0] == 0);
        CHECK(counts[1] + counts[2] + counts[3] == 20);
    }
    CHECK(features::ctd_class(0, 'X') == 0);
}

TEST_CASE("CTD worked examples") {
    SUBCASE("AAAA: alanine is hydrophobicity-neutral") {
        auto v = features::ctd_features("AAAA");
        REQUIRE(static_cast<int>(v.size()) == features::kCtdDim);
        CHECK(v[0] == doctest::Approx(0.0));  // polar
        CHECK(v[1] == doctest::Approx(1.0));  // neutral
        CHECK(v[2] == doctest::Approx(0.0));  // hydrophobic
        CHECK(v[3] == doctest::Approx(0.0));  // transitions all zero
        CHECK(v[4] == doctest::Approx(0.0));
        CHECK(v[5] == doctest::Approx(0.0));
    }
    SUBCASE("RC: polar/hydrophobic pair") {
        auto v = features::ctd_features("RC");
        CHECK(v[0] == doctest::Approx(0.5));
        CHECK(v[1] == doctest::Approx(0.0));
        CHECK(v[2] == doctest::Approx(0.5));
        CHECK(v[3] == doctest::Approx(0.0));  // 1<->2
        CHECK(v[4] == doctest::Approx(1.0));  // 1<->3
        CHECK(v[5] == doctest::Approx(0.0));  // 2<->3
    }
    SUBCASE("too-short sequences error") {
        CHECK_THROWS(features::ctd_features("A"));
        CHECK_THROWS(features::ctd_features(""));
        CHECK_THROWS(features::ctd_features("XX"));  // nothing classifiable
    }
    SUBCASE("unknown residues are skipped and counted") {
        int skipped = 0;
        auto v = features::ctd_features("RXC", &skipped);
        CHECK(skipped == 1);
        CHECK(v[4] == doctest::Approx(1.0));  // same as "RC"
    }
}

TEST_CASE("CTD invariants on random sequences") {
    Rng rng(42);
    const std::string alphabet(features::kStandardResidues);
    for (int round = 0; round < 100; ++round) {
        const int len = 2 + rng.below_int(120);
        std::string seq(len, 'A');
        for (char& c : seq) c = alphabet[rng.below_int(20)];
        auto v = features::ctd_features(seq);
        REQUIRE(static_cast<int>(v.size()) == 147);
        for (int attr = 0; attr < 7; ++attr) {
            const int base = attr * 21;
            CHECK(v[base] + v[base + 1] + v[base + 2] == doctest::Approx(1.0));
            for (int k = 0; k < 21; ++k) {
                CHECK(v[base + k] >= 0.0);
                CHECK(v[base + k] <= 1.0);
            }
        }
    }
}

TEST_CASE("AC features") {
    SUBCASE("constant property sequence gives zeros") {
        auto v = features::ac_features(std::string(40, 'A'), 10);
        REQUIRE(v.size() == 70);
        for (double x : v) CHECK(x == doctest::Approx(0.0));
    }
    SUBCASE("default layout is 7 x lag_max") {
        std::string seq = "ACDEFGHIKLMNPQRSTVWYACDEFGHIKLMNPQRSTVWY";
        auto v = features::ac_features(seq);
        CHECK(v.size() == 7 * 30);
    }
    SUBCASE("alternating charge flips sign between lag 1 and lag 2") {
        std::string seq;
        for (int i = 0; i < 40; ++i) seq += (i % 2 ? 'D' : 'K');  // +1/-1 series
        auto v = features::ac_features(seq, 4);
        const int charge = 3;  // property index
        CHECK(v[charge * 4 + 0] < -0.9);  // lag 1
        CHECK(v[charge * 4 + 1] > 0.9);   // lag 2
    }
    SUBCASE("length must exceed lag_max") {
        CHECK_THROWS(features::ac_features(std::string(30, 'A'), 30));
    }
}

TEST_CASE("one-hot e2 rows") {
    for (char c : features::kStandardResidues) {
        auto row = features::AminoAcidEmbedding::e2(c);
        double sum = 0;
        for (float x : row) sum += x;
        CHECK(sum == doctest::Approx(1.0));
        CHECK(row[features::aa_class(c) - 1] == doctest::Approx(1.0));
    }
    auto unknown = features::AminoAcidEmbedding::e2('X');
    CHECK(unknown[7] == doctest::Approx(1.0));
}

TEST_CASE("encode_protein") {
    features::AminoAcidEmbedding embedding;  // empty e1: everything OOV -> zero

    SUBCASE("always 13 columns") {
        auto m = features::encode_protein("MKVLY", embedding);
        CHECK(m.cols == 13);
        CHECK(m.rows == 5);
    }
    SUBCASE("long sequences truncate at max_len") {
        std::string seq(3000, 'A');
        auto m = features::encode_protein(seq, embedding, 2000);
        CHECK(m.rows == 2000);
        CHECK(m.original_length == 3000);
    }
    SUBCASE("KK with zero e1: rows are zero then one-hot class 5") {
        auto m = features::encode_protein("KK", embedding);
        REQUIRE(m.rows == 2);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 5; ++c) CHECK(m.at(r, c) == doctest::Approx(0.0f));
            for (int c = 5; c < 13; ++c) {
                CHECK(m.at(r, c) == doctest::Approx(c == 5 + 4 ? 1.0f : 0.0f));
            }
        }
    }
    SUBCASE("e1 vector lands in the first five columns") {
        features::AminoAcidEmbedding emb2;
        emb2.e1["MKV"] = {1, 2, 3, 4, 5};
        auto m = features::encode_protein("MKVL", emb2);
        CHECK(m.at(0, 0) == doctest::Approx(1.0f));
        CHECK(m.at(0, 4) == doctest::Approx(5.0f));
        CHECK(m.at(1, 0) == doctest::Approx(0.0f));  // "KVL" is OOV
    }
    SUBCASE("empty sequence errors") { CHECK_THROWS(features::encode_protein("", embedding)); }
}

TEST_CASE("embedding JSON round-trip") {
    features::AminoAcidEmbedding embedding;
    embedding.e1["MKV"] = {0.5f, -1.25f, 0.0f, 3.75f, -0.125f};
    embedding.e1["KVL"] = {1.0f, 2.0f, 3.0f, 4.0f, 5.0f};
    auto j = features::embedding_to_json(embedding);
    auto back = features::embedding_from_json(j);
    CHECK(back.e1.size() == 2);
    CHECK(back.e1.at("MKV") == embedding.e1.at("MKV"));
    CHECK(features::embedding_to_json(back).dump() == j.dump());
}

TEST_CASE("matrix binary round-trip") {
    features::AminoAcidEmbedding embedding;
    embedding.e1["MKV"] = {0.5f, -1.0f, 2.0f, 0.25f, -3.5f};
    auto m = features::encode_protein("MKVLY", embedding);
    const std::string path = "test_matrix_roundtrip.bin";
    features::save_matrix(m, path);
    auto back = features::load_matrix(path);
    CHECK(back.rows == m.rows);
    CHECK(back.cols == m.cols);
    CHECK(back.data == m.data);
    std::remove(path.c_str());
}

TEST_CASE("skip-gram trainer") {
    SUBCASE("single-token corpus") {
        auto emb = features::train_skipgram({"MKV"});
        CHECK(emb.e1.size() == 1);
        CHECK(emb.e1.count("MKV") == 1);
    }
    SUBCASE("overlapping 3-mers, stride 1") {
        auto emb = features::train_skipgram({"MKVL"});
        CHECK(emb.e1.size() == 2);
        CHECK(emb.e1.count("MKV") == 1);
        CHECK(emb.e1.count("KVL") == 1);
    }
    SUBCASE("all-short corpus errors") {
        CHECK_THROWS(features::train_skipgram({"MK", "A"}));
        CHECK_THROWS(features::train_skipgram({}));
    }
    SUBCASE("co-occurring tokens end up closer than never-co-occurring ones") {
        // AAAKKK yields {AAA, AAK, AKK, KKK}; CCCDDD yields {CCC, CCD, CDD, DDD};
        // the two families never share a window
        std::vector<std::string> corpus;
        for (int i = 0; i < 60; ++i) {
            corpus.push_back("AAAKKK");
            corpus.push_back("CCCDDD");
        }
        auto cosine = [](const std::array<float, 5>& a, const std::array<float, 5>& b) {
            double dot = 0, na = 0, nb = 0;
            for (int i = 0; i < 5; ++i) {
                dot += a[i] * b[i];
                na += a[i] * a[i];
                nb += b[i] * b[i];
            }
            return dot / (std::sqrt(na) * std::sqrt(nb) + 1e-12);
        };
        int wins = 0;
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            features::SkipGramConfig config;
            config.seed = seed;
            auto emb = features::train_skipgram(corpus, config);
            const double near = cosine(emb.e1.at("AAA"), emb.e1.at("AAK"));
            const double far = cosine(emb.e1.at("AAA"), emb.e1.at("CCC"));
            if (near > far) ++wins;
        }
        CHECK(wins >= 6);  // majority across seeds
    }
    SUBCASE("deterministic per seed") {
        features::SkipGramConfig config;
        config.seed = 5;
        auto a = features::train_skipgram({"MKVLYAAK", "GGMKVLYK"}, config);
        auto b = features::train_skipgram({"MKVLYAAK", "GGMKVLYK"}, config);
        CHECK(features::embedding_to_json(a).dump() == features::embedding_to_json(b).dump());
    }
}
