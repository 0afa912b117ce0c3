#include "ppibench/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ppibench::features {

bool is_standard_residue(char c) {
    return kStandardResidues.find(c) != std::string_view::npos;
}

int aa_class(char residue) {
    if (residue < 'A' || residue > 'Z') {
        throw std::runtime_error(std::string("amino-acid class needs an uppercase letter, got '") + residue + "'");
    }
    switch (residue) {
        case 'A': case 'G': case 'V': return 1;
        case 'I': case 'L': case 'F': case 'P': return 2;
        case 'Y': case 'M': case 'T': case 'S': return 3;
        case 'H': case 'N': case 'Q': case 'W': return 4;
        case 'R': case 'K': return 5;
        case 'D': case 'E': return 6;
        case 'C': return 7;
        default: return 8;  // U, O, X and other non-standard letters
    }
}

const std::array<std::string_view, kCtdAttributes> kCtdAttributeNames = {
    "hydrophobicity", "vdw_volume",    "polarity",      "charge",
    "secondary_structure", "solvent_accessibility", "polarizability"};

namespace {

// Three residue groups per attribute; every group triple partitions the
// 20 standard residues.
struct CtdAttribute {
    std::string_view class1, class2, class3;
};

constexpr std::array<CtdAttribute, kCtdAttributes> kCtdTable = {{
    {"RKEDQN", "GASTPHY", "CLVIMFW"},          // hydrophobicity: polar / neutral / hydrophobic
    {"GASTPDC", "NVEQIL", "MHKFRYW"},          // normalized van der Waals volume
    {"LIFWCMVY", "PATGS", "HQRKNED"},          // polarity
    {"KR", "ANCQGHILMFPSTWYV", "DE"},          // charge
    {"EALMQKRH", "VIYCWFT", "GNPSD"},          // secondary structure: helix / strand / coil
    {"ALFCGIVW", "RKQEND", "MSPTHY"},          // solvent accessibility: buried / exposed / intermediate
    {"GASDT", "CPNVEQIL", "KMHFRYW"},          // polarizability
}};

}  // namespace

int ctd_class(int attribute, char residue) {
    if (attribute < 0 || attribute >= kCtdAttributes) {
        throw std::runtime_error("CTD attribute index out of range: " + std::to_string(attribute));
    }
    const auto& attr = kCtdTable[attribute];
    if (attr.class1.find(residue) != std::string_view::npos) return 1;
    if (attr.class2.find(residue) != std::string_view::npos) return 2;
    if (attr.class3.find(residue) != std::string_view::npos) return 3;
    return 0;
}

std::vector<double> ctd_features(const std::string& sequence, int* skipped) {
    if (sequence.size() < 2) throw std::runtime_error("CTD needs a sequence of length >= 2");

    std::string filtered;
    filtered.reserve(sequence.size());
    int dropped = 0;
    for (char c : sequence) {
        if (is_standard_residue(c)) filtered.push_back(c);
        else ++dropped;
    }
    if (skipped) *skipped = dropped;
    if (filtered.size() < 2) {
        throw std::runtime_error("CTD needs >= 2 classifiable residues (got " +
                                 std::to_string(filtered.size()) + ")");
    }

    const int len = static_cast<int>(filtered.size());
    std::vector<double> out;
    out.reserve(kCtdDim);

    for (int attr = 0; attr < kCtdAttributes; ++attr) {
        std::vector<int> cls(len);
        for (int i = 0; i < len; ++i) cls[i] = ctd_class(attr, filtered[i]);

        // composition
        std::array<int, 3> count{0, 0, 0};
        for (int c : cls) ++count[c - 1];
        for (int k = 0; k < 3; ++k) out.push_back(count[k] / static_cast<double>(len));

        // transitions between distinct classes: 1<->2, 1<->3, 2<->3
        std::array<int, 3> trans{0, 0, 0};
        for (int i = 0; i + 1 < len; ++i) {
            int lo = std::min(cls[i], cls[i + 1]);
            int hi = std::max(cls[i], cls[i + 1]);
            if (lo == hi) continue;
            if (lo == 1 && hi == 2) ++trans[0];
            else if (lo == 1 && hi == 3) ++trans[1];
            else ++trans[2];
        }
        for (int k = 0; k < 3; ++k) out.push_back(trans[k] / static_cast<double>(len - 1));

        // distribution: positions (fraction of length) of the 1st, 25%, 50%,
        // 75% and last occurrence of each class; 0 when a class is absent
        for (int c = 1; c <= 3; ++c) {
            std::vector<int> pos;
            for (int i = 0; i < len; ++i) {
                if (cls[i] == c) pos.push_back(i + 1);  // 1-based
            }
            if (pos.empty()) {
                for (int q = 0; q < 5; ++q) out.push_back(0.0);
                continue;
            }
            const int k = static_cast<int>(pos.size());
            auto landmark = [&](double frac) {
                int rank = std::max(1, static_cast<int>(std::ceil(frac * k)));
                return pos[rank - 1] / static_cast<double>(len);
            };
            out.push_back(pos.front() / static_cast<double>(len));
            out.push_back(landmark(0.25));
            out.push_back(landmark(0.50));
            out.push_back(landmark(0.75));
            out.push_back(pos.back() / static_cast<double>(len));
        }
    }
    return out;
}

const std::array<std::string_view, 7> kAcPropertyNames = {
    "hydropathy", "vdw_volume", "polarity", "charge",
    "helix_propensity", "max_asa", "polarizability"};

namespace {

// Numeric per-residue scales matching the CTD attribute list, indexed by
// position in kStandardResidues (ACDEFGHIKLMNPQRSTVWY).
//   hydropathy: Kyte-Doolittle; vdW volume: normalized side-chain volume;
//   polarity: Grantham; charge: net side-chain charge at pH 7;
//   helix propensity: Chou-Fasman P(alpha); max ASA: Tien 2013 theoretical;
//   polarizability: Charton-Charton.
constexpr std::array<std::array<double, 20>, 7> kAcScales = {{
    {1.8, 2.5, -3.5, -3.5, 2.8, -0.4, -3.2, 4.5, -3.9, 3.8,
     1.9, -3.5, -1.6, -3.5, -4.5, -0.8, -0.7, 4.2, -0.9, -1.3},
    {1.00, 2.43, 2.78, 3.78, 5.89, 0.00, 4.66, 4.00, 4.77, 4.00,
     4.43, 2.95, 2.72, 3.95, 6.13, 1.60, 2.60, 3.00, 8.08, 6.47},
    {8.1, 5.5, 13.0, 12.3, 5.2, 9.0, 10.4, 5.2, 11.3, 4.9,
     5.7, 11.6, 8.0, 10.5, 10.5, 9.2, 8.6, 5.9, 5.4, 6.2},
    {0.0, 0.0, -1.0, -1.0, 0.0, 0.0, 0.1, 0.0, 1.0, 0.0,
     0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {1.42, 0.70, 1.01, 1.51, 1.13, 0.57, 1.00, 1.08, 1.16, 1.21,
     1.45, 0.67, 0.57, 1.11, 0.98, 0.77, 0.83, 1.06, 1.08, 0.69},
    {129.0, 167.0, 193.0, 223.0, 240.0, 104.0, 224.0, 197.0, 236.0, 201.0,
     224.0, 195.0, 159.0, 225.0, 274.0, 155.0, 172.0, 174.0, 285.0, 263.0},
    {0.046, 0.128, 0.105, 0.151, 0.290, 0.000, 0.230, 0.186, 0.219, 0.186,
     0.221, 0.134, 0.131, 0.180, 0.291, 0.062, 0.108, 0.140, 0.409, 0.298},
}};

int standard_residue_index(char c) {
    auto pos = kStandardResidues.find(c);
    return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

}  // namespace

std::vector<double> ac_features(const std::string& sequence, int lag_max, int* skipped) {
    if (lag_max < 1) throw std::runtime_error("AC needs lag_max >= 1");

    std::vector<int> idx;
    idx.reserve(sequence.size());
    int dropped = 0;
    for (char c : sequence) {
        int k = standard_residue_index(c);
        if (k >= 0) idx.push_back(k);
        else ++dropped;
    }
    if (skipped) *skipped = dropped;
    const int len = static_cast<int>(idx.size());
    if (len <= lag_max) {
        throw std::runtime_error("AC needs sequence length > lag_max (" + std::to_string(len) + " <= " +
                                 std::to_string(lag_max) + ")");
    }

    std::vector<double> out;
    out.reserve(7 * static_cast<size_t>(lag_max));
    std::vector<double> z(len);
    for (int prop = 0; prop < 7; ++prop) {
        const auto& scale = kAcScales[prop];
        double mean = 0;
        for (int i = 0; i < len; ++i) mean += scale[idx[i]];
        mean /= len;
        double var = 0;
        for (int i = 0; i < len; ++i) {
            double d = scale[idx[i]] - mean;
            var += d * d;
        }
        double sd = std::sqrt(var / len);
        for (int i = 0; i < len; ++i) {
            z[i] = sd > 1e-12 ? (scale[idx[i]] - mean) / sd : 0.0;
        }
        for (int lag = 1; lag <= lag_max; ++lag) {
            double acc = 0;
            for (int i = 0; i + lag < len; ++i) acc += z[i] * z[i + lag];
            out.push_back(acc / (len - lag));
        }
    }
    return out;
}

std::array<float, kE1Dim> AminoAcidEmbedding::e1_or_zero(const std::string& token) const {
    auto it = e1.find(token);
    if (it == e1.end()) return {};
    return it->second;
}

std::array<float, kE2Dim> AminoAcidEmbedding::e2(char residue) {
    std::array<float, kE2Dim> row{};
    row[aa_class(residue) - 1] = 1.0f;
    return row;
}

ProteinMatrix encode_protein(const std::string& sequence, const AminoAcidEmbedding& embedding, int max_len) {
    if (sequence.empty()) throw std::runtime_error("cannot encode an empty sequence");
    if (max_len < 1) throw std::runtime_error("max_len must be >= 1");

    ProteinMatrix m;
    m.original_length = static_cast<int>(sequence.size());
    m.rows = std::min<int>(m.original_length, max_len);
    m.data.assign(static_cast<size_t>(m.rows) * kResidueDim, 0.0f);

    for (int i = 0; i < m.rows; ++i) {
        float* row = m.data.data() + static_cast<size_t>(i) * kResidueDim;
        if (i + 2 < m.rows) {
            auto vec = embedding.e1_or_zero(sequence.substr(i, 3));
            std::copy(vec.begin(), vec.end(), row);
        }
        auto onehot = AminoAcidEmbedding::e2(sequence[i]);
        std::copy(onehot.begin(), onehot.end(), row + kE1Dim);
    }
    return m;
}

nlohmann::json embedding_to_json(const AminoAcidEmbedding& embedding) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [token, vec] : embedding.e1) j[token] = vec;
    return j;
}

AminoAcidEmbedding embedding_from_json(const nlohmann::json& j) {
    AminoAcidEmbedding embedding;
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto vec = it.value().get<std::vector<float>>();
        if (vec.size() != kE1Dim) {
            throw std::runtime_error("embedding vector for '" + it.key() + "' is not " +
                                     std::to_string(kE1Dim) + "-dimensional");
        }
        std::array<float, kE1Dim> arr{};
        std::copy(vec.begin(), vec.end(), arr.begin());
        embedding.e1.emplace(it.key(), arr);
    }
    return embedding;
}

AminoAcidEmbedding load_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);
    nlohmann::json j;
    in >> j;
    return embedding_from_json(j);
}

void save_embedding(const AminoAcidEmbedding& embedding, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write embedding file: " + path);
    out << embedding_to_json(embedding).dump(2) << '\n';
}

void save_matrix(const ProteinMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write matrix file: " + path);
    uint32_t rows = static_cast<uint32_t>(matrix.rows);
    uint32_t cols = static_cast<uint32_t>(matrix.cols);
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    out.write(reinterpret_cast<const char*>(matrix.data.data()),
              static_cast<std::streamsize>(matrix.data.size() * sizeof(float)));
}

ProteinMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    if (!in) throw std::runtime_error("matrix file too short: " + path);
    ProteinMatrix m;
    m.rows = static_cast<int>(rows);
    m.cols = static_cast<int>(cols);
    m.original_length = m.rows;
    m.data.resize(static_cast<size_t>(rows) * cols);
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("matrix file truncated: " + path);
    return m;
}

}  // namespace ppibench::features
