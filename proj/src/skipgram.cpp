#include "ppibench/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "ppibench/rng.hpp"

namespace ppibench::features {

AminoAcidEmbedding train_skipgram(const std::vector<std::string>& sequences, const SkipGramConfig& config) {
    if (sequences.empty()) throw std::runtime_error("skip-gram: empty corpus");
    if (config.dim < 1 || config.window < 1 || config.epochs < 1 || config.negatives < 0) {
        throw std::runtime_error("skip-gram: invalid config");
    }

    // vocabulary in first-appearance order
    std::unordered_map<std::string, int> vocab;
    std::vector<std::string> tokens_by_id;
    std::vector<int64_t> counts;
    std::vector<std::vector<int>> sentences;
    int64_t total_positions = 0;
    for (const auto& seq : sequences) {
        if (seq.size() < 3) continue;
        std::vector<int> sent;
        sent.reserve(seq.size() - 2);
        for (size_t i = 0; i + 2 < seq.size(); ++i) {
            std::string tok = seq.substr(i, 3);
            auto [it, inserted] = vocab.emplace(tok, static_cast<int>(tokens_by_id.size()));
            if (inserted) {
                tokens_by_id.push_back(tok);
                counts.push_back(0);
            }
            ++counts[it->second];
            sent.push_back(it->second);
        }
        total_positions += static_cast<int64_t>(sent.size());
        sentences.push_back(std::move(sent));
    }
    if (tokens_by_id.empty()) {
        throw std::runtime_error("skip-gram: every sequence is shorter than 3 residues, no 3-mer tokens");
    }

    const int vocab_size = static_cast<int>(tokens_by_id.size());
    const int dim = config.dim;
    Rng rng(config.seed);

    // input vectors small-random, output vectors zero (word2vec convention)
    std::vector<double> in(static_cast<size_t>(vocab_size) * dim);
    std::vector<double> out(static_cast<size_t>(vocab_size) * dim, 0.0);
    for (auto& v : in) v = rng.uniform(-0.5 / dim, 0.5 / dim);

    // unigram^(3/4) table for negative sampling
    const int table_size = std::max(vocab_size * 16, 1 << 16);
    std::vector<int> table(table_size);
    {
        double norm = 0;
        for (int64_t c : counts) norm += std::pow(static_cast<double>(c), 0.75);
        int word = 0;
        double cum = std::pow(static_cast<double>(counts[0]), 0.75) / norm;
        for (int i = 0; i < table_size; ++i) {
            table[i] = word;
            if ((i + 1) / static_cast<double>(table_size) > cum && word + 1 < vocab_size) {
                ++word;
                cum += std::pow(static_cast<double>(counts[word]), 0.75) / norm;
            }
        }
    }

    const int64_t total_steps = static_cast<int64_t>(config.epochs) * total_positions;
    int64_t done = 0;
    std::vector<double> accum(dim);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (const auto& sent : sentences) {
            const int len = static_cast<int>(sent.size());
            for (int pos = 0; pos < len; ++pos) {
                const double progress = static_cast<double>(done) / static_cast<double>(total_steps);
                const double lr = std::max(config.lr * (1.0 - progress), config.lr * 1e-4);
                ++done;
                const int center = sent[pos];
                double* vc = in.data() + static_cast<size_t>(center) * dim;
                for (int off = -config.window; off <= config.window; ++off) {
                    if (off == 0) continue;
                    const int cpos = pos + off;
                    if (cpos < 0 || cpos >= len) continue;
                    const int context = sent[cpos];
                    std::fill(accum.begin(), accum.end(), 0.0);
                    for (int s = 0; s <= config.negatives; ++s) {
                        int target;
                        double label;
                        if (s == 0) {
                            target = context;
                            label = 1.0;
                        } else {
                            target = table[rng.below(static_cast<uint64_t>(table_size))];
                            if (target == context) continue;
                            label = 0.0;
                        }
                        double* vt = out.data() + static_cast<size_t>(target) * dim;
                        double f = 0;
                        for (int d = 0; d < dim; ++d) f += vc[d] * vt[d];
                        const double g = (label - 1.0 / (1.0 + std::exp(-f))) * lr;
                        for (int d = 0; d < dim; ++d) {
                            accum[d] += g * vt[d];
                            vt[d] += g * vc[d];
                        }
                    }
                    for (int d = 0; d < dim; ++d) vc[d] += accum[d];
                }
            }
        }
    }

    AminoAcidEmbedding embedding;
    embedding.e1.reserve(vocab_size);
    for (int w = 0; w < vocab_size; ++w) {
        std::array<float, kE1Dim> vec{};
        for (int d = 0; d < std::min(dim, kE1Dim); ++d) {
            vec[d] = static_cast<float>(in[static_cast<size_t>(w) * dim + d]);
        }
        embedding.e1.emplace(tokens_by_id[w], vec);
    }
    return embedding;
}

}  // namespace ppibench::features
