#include "tae/tools/schema.hpp"

#include <regex>

namespace tae {

namespace {

std::string id_pattern(IdKind kind) {
    return "^" + std::string(id_kind_prefix(kind)) + "_[0-9a-hjkmnp-tv-z]{8}$";
}

json unit_array(std::size_t n, const std::string& description) {
    return {
        {"type", "array"},
        {"items", {{"type", "number"}, {"minimum", 0.0}, {"maximum", 1.0}}},
        {"minItems", n},
        {"maxItems", n},
        {"description", description},
    };
}

bool type_matches(const json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "boolean") return value.is_boolean();
    if (type == "integer") return value.is_number_integer();
    if (type == "number") return value.is_number();
    if (type == "null") return value.is_null();
    return false;
}

}  // namespace

json field_schema(const MetaField& f) {
    std::string description = f.description;
    if (!f.tooltip.empty()) description += " (" + f.tooltip + ")";
    json out;
    switch (f.kind) {
        case ValueKind::Number:
        case ValueKind::TimeSeconds:
            out = {{"type", "number"}};
            break;
        case ValueKind::Integer:
            out = {{"type", "integer"}};
            break;
        case ValueKind::String:
            out = {{"type", "string"}};
            if (!f.allowed.empty()) out["enum"] = f.allowed;
            break;
        case ValueKind::Enum:
            out = {{"type", "string"}, {"enum", f.allowed}};
            break;
        case ValueKind::Color:
            out = unit_array(4, description);
            break;
        case ValueKind::Point2dNormalized:
            out = unit_array(2, description);
            break;
        case ValueKind::AssetRef:
            out = {{"type", "string"}, {"pattern", "^(asset_[0-9a-hjkmnp-tv-z]{8})?$"}};
            break;
        case ValueKind::Boolean:
            out = {{"type", "boolean"}};
            break;
    }
    if (f.interval) {
        out["minimum"] = f.interval->min;
        out["maximum"] = f.interval->max;
    }
    out["description"] = description;
    out["default"] = f.default_value;
    return out;
}

json id_schema(IdKind kind, std::string description) {
    return {{"type", "string"}, {"pattern", id_pattern(kind)}, {"description", std::move(description)}};
}

std::optional<std::string> validate_schema(const json& value, const json& schema, const std::string& path) {
    if (auto it = schema.find("type"); it != schema.end()) {
        if (!type_matches(value, it->get<std::string>())) {
            return path + ": expected " + it->get<std::string>();
        }
    }
    if (auto it = schema.find("enum"); it != schema.end()) {
        bool found = false;
        for (const auto& option : *it) found = found || option == value;
        if (!found) return path + ": value not in enumeration";
    }
    if (value.is_number()) {
        double x = value.get<double>();
        if (auto it = schema.find("minimum"); it != schema.end() && x < it->get<double>()) {
            return path + ": below minimum " + it->dump();
        }
        if (auto it = schema.find("maximum"); it != schema.end() && x > it->get<double>()) {
            return path + ": above maximum " + it->dump();
        }
    }
    if (value.is_string()) {
        if (auto it = schema.find("pattern"); it != schema.end()) {
            std::regex re(it->get<std::string>());
            if (!std::regex_search(value.get<std::string>(), re)) return path + ": does not match " + it->dump();
        }
    }
    if (value.is_array()) {
        if (auto it = schema.find("minItems"); it != schema.end() && value.size() < it->get<std::size_t>()) {
            return path + ": too few items";
        }
        if (auto it = schema.find("maxItems"); it != schema.end() && value.size() > it->get<std::size_t>()) {
            return path + ": too many items";
        }
        if (auto it = schema.find("items"); it != schema.end()) {
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (auto why = validate_schema(value[i], *it, path + "[" + std::to_string(i) + "]")) return why;
            }
        }
    }
    if (value.is_object()) {
        const json empty = json::object();
        auto props_it = schema.find("properties");
        const json& props = props_it != schema.end() ? *props_it : empty;
        if (auto it = schema.find("required"); it != schema.end()) {
            for (const auto& key : *it) {
                if (!value.contains(key.get<std::string>())) return path + ": missing required " + key.dump();
            }
        }
        bool closed = schema.value("additionalProperties", true) == false;
        for (const auto& [key, member] : value.items()) {
            auto p = props.find(key);
            if (p == props.end()) {
                if (closed) return path + ": unexpected property '" + key + "'";
                continue;
            }
            if (auto why = validate_schema(member, *p, path + "." + key)) return why;
        }
    }
    return std::nullopt;
}

}  // namespace tae
