#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppibench/features.hpp"

namespace ppibench::features {

struct SkipGramConfig {
    int dim = kE1Dim;  // word vector size
    int window = 2;
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;
    uint64_t seed = 1;
};

/// Skip-gram with negative sampling over overlapping 3-mer tokens.
/// Single-threaded and deterministic per seed. Sequences shorter than
/// 3 contribute no tokens; throws if the whole corpus yields none.
AminoAcidEmbedding train_skipgram(const std::vector<std::string>& sequences,
                                  const SkipGramConfig& config = {});

}  // namespace ppibench::features
