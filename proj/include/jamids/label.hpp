#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace jamids {

// Fixed class order; also the row/column order of every confusion matrix.
enum class Label : int {
    Normal = 0,
    ConstantJamming = 1,
    RandomJamming = 2,
    DeceptiveJamming = 3,
    ReactiveJamming = 4,
};

inline constexpr int kNumClasses = 5;

inline constexpr std::array<Label, kNumClasses> kAllLabels = {
    Label::Normal, Label::ConstantJamming, Label::RandomJamming,
    Label::DeceptiveJamming, Label::ReactiveJamming};

constexpr int index_of(Label l) noexcept { return static_cast<int>(l); }
Label label_from_index(int idx);
constexpr bool is_attack(Label l) noexcept { return l != Label::Normal; }

// Display name used in CSV output ("Normal", "Constant jamming", ...).
std::string_view to_string(Label l) noexcept;

// Lower-cased, trimmed, with runs of space/underscore/hyphen collapsed to one space.
std::string normalize_token(std::string_view s);

// User-supplied renaming of dataset class names onto the five labels, keyed by
// normalized token. Loaded from a JSON object {"grayhole": "Random jamming", ...}.
class LabelMap {
public:
    LabelMap() = default;
    static LabelMap from_json_file(const std::string& path);

    void add(std::string_view from, Label to);
    std::optional<Label> lookup(std::string_view raw) const;
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::map<std::string, Label> entries_;
};

// Built-in aliases first, then the user map (user entries win).
std::optional<Label> parse_label(std::string_view raw, const LabelMap* user = nullptr);

}  // namespace jamids
