#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ppibench::features {

inline constexpr std::string_view kStandardResidues = "ACDEFGHIKLMNPQRSTVWY";
bool is_standard_residue(char c);

/// Electrostatic/hydrophobic amino-acid class, 1..7 for the 20 standard
/// residues, 8 for U, O, X and anything else. Throws on non-letters.
int aa_class(char residue);

inline constexpr int kCtdAttributes = 7;
extern const std::array<std::string_view, kCtdAttributes> kCtdAttributeNames;

/// CTD class 1..3 for standard residues, 0 for unclassified ones.
int ctd_class(int attribute, char residue);

inline constexpr int kCtdDim = kCtdAttributes * (3 + 3 + 15);  // 147

/// Composition / Transition / Distribution descriptor. Residues outside
/// the 20 standard ones are skipped (count reported via `skipped`).
std::vector<double> ctd_features(const std::string& sequence, int* skipped = nullptr);

/// Auto-covariance over 7 numeric physicochemical scales, z-normalized
/// per sequence; layout is property-major: [prop0 lag1..lag_max, prop1 ...].
std::vector<double> ac_features(const std::string& sequence, int lag_max = 30, int* skipped = nullptr);
extern const std::array<std::string_view, 7> kAcPropertyNames;

inline constexpr int kE1Dim = 5;
inline constexpr int kE2Dim = 8;
inline constexpr int kResidueDim = kE1Dim + kE2Dim;  // 13

struct AminoAcidEmbedding {
    std::unordered_map<std::string, std::array<float, kE1Dim>> e1;  // 3-mer co-occurrence part

    std::array<float, kE1Dim> e1_or_zero(const std::string& token) const;
    static std::array<float, kE2Dim> e2(char residue);  // one-hot class part
};

struct ProteinMatrix {
    int rows = 0;
    int cols = kResidueDim;
    int original_length = 0;
    std::vector<float> data;  // row-major

    float at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

/// Per-residue 13-dim encoding: [e1(3-mer starting here), e2(residue)].
/// The last two rows (no full 3-mer) and out-of-vocabulary 3-mers get a
/// zero e1 part. Sequences longer than max_len are truncated.
ProteinMatrix encode_protein(const std::string& sequence, const AminoAcidEmbedding& embedding,
                             int max_len = 2000);

nlohmann::json embedding_to_json(const AminoAcidEmbedding& embedding);
AminoAcidEmbedding embedding_from_json(const nlohmann::json& j);
AminoAcidEmbedding load_embedding(const std::string& path);
void save_embedding(const AminoAcidEmbedding& embedding, const std::string& path);

// binary matrix format: uint32 rows, uint32 cols, then float32 row-major,
// all little-endian
void save_matrix(const ProteinMatrix& matrix, const std::string& path);
ProteinMatrix load_matrix(const std::string& path);

}  // namespace ppibench::features
