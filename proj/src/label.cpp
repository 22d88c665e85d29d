#include "jamids/label.hpp"

#include <cctype>
#include <fstream>

#include <json.hpp>

#include "jamids/errors.hpp"

namespace jamids {

Label label_from_index(int idx) {
    if (idx < 0 || idx >= kNumClasses) throw ShapeError("class index out of range: " + std::to_string(idx));
    return static_cast<Label>(idx);
}

std::string_view to_string(Label l) noexcept {
    switch (l) {
        case Label::Normal: return "Normal";
        case Label::ConstantJamming: return "Constant jamming";
        case Label::RandomJamming: return "Random jamming";
        case Label::DeceptiveJamming: return "Deceptive jamming";
        case Label::ReactiveJamming: return "Reactive jamming";
    }
    return "?";
}

std::string normalize_token(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_sep = false;
    for (char c : s) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isspace(uc) || c == '_' || c == '-') {
            pending_sep = !out.empty();
            continue;
        }
        if (c == '"') continue;
        if (pending_sep) out.push_back(' ');
        pending_sep = false;
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

namespace {

std::optional<Label> builtin_label(const std::string& tok) {
    static const std::map<std::string, Label> table = {
        {"normal", Label::Normal},
        {"constant jamming", Label::ConstantJamming},
        {"constantjamming", Label::ConstantJamming},
        {"constant jammer", Label::ConstantJamming},
        {"constant", Label::ConstantJamming},
        {"random jamming", Label::RandomJamming},
        {"randomjamming", Label::RandomJamming},
        {"random jammer", Label::RandomJamming},
        {"random", Label::RandomJamming},
        {"deceptive jamming", Label::DeceptiveJamming},
        {"deceptivejamming", Label::DeceptiveJamming},
        {"deceptive jammer", Label::DeceptiveJamming},
        {"deceptive", Label::DeceptiveJamming},
        {"reactive jamming", Label::ReactiveJamming},
        {"reactivejamming", Label::ReactiveJamming},
        {"reactive jammer", Label::ReactiveJamming},
        {"reactive", Label::ReactiveJamming},
    };
    auto it = table.find(tok);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

}  // namespace

void LabelMap::add(std::string_view from, Label to) { entries_[normalize_token(from)] = to; }

std::optional<Label> LabelMap::lookup(std::string_view raw) const {
    auto it = entries_.find(normalize_token(raw));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

LabelMap LabelMap::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open label map: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("label map " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw SchemaError("label map must be a JSON object of name -> label");
    LabelMap map;
    for (auto& [key, value] : doc.items()) {
        if (!value.is_string()) throw SchemaError("label map value for '" + key + "' is not a string");
        auto target = builtin_label(normalize_token(value.get<std::string>()));
        if (!target) throw SchemaError("label map target '" + value.get<std::string>() + "' is not a known class");
        map.add(key, *target);
    }
    return map;
}

std::optional<Label> parse_label(std::string_view raw, const LabelMap* user) {
    if (user) {
        if (auto l = user->lookup(raw)) return l;
    }
    return builtin_label(normalize_token(raw));
}

}  // namespace jamids
