#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ppibench::data {

inline constexpr int kLabelCount = 7;

/// Fixed interaction-type order; bit i of a LabelSet corresponds to
/// kLabelNames[i] everywhere (classifier outputs, reports, JSON).
inline constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "reaction", "binding", "ptmod", "activation", "inhibition", "catalysis", "expression"};

std::optional<int> label_index(std::string_view name);
std::string valid_label_names();  // comma-joined, for error messages

class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(uint8_t bits) : bits_(static_cast<uint8_t>(bits & 0x7f)) {}

    static LabelSet single(int idx) {
        LabelSet s;
        s.set(idx);
        return s;
    }

    bool has(int idx) const { return (bits_ >> idx) & 1; }
    void set(int idx) { bits_ |= static_cast<uint8_t>(uint8_t{1} << idx); }
    LabelSet union_with(LabelSet other) const { return LabelSet(static_cast<uint8_t>(bits_ | other.bits_)); }
    bool empty() const { return bits_ == 0; }
    int count() const;
    uint8_t bits() const { return bits_; }
    std::vector<std::string> names() const;

    bool operator==(const LabelSet&) const = default;

private:
    uint8_t bits_ = 0;
};

}  // namespace ppibench::data
