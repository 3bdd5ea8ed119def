#include "tae/core/meta.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tae {

std::string_view value_kind_name(ValueKind kind) {
    switch (kind) {
        case ValueKind::Number: return "number";
        case ValueKind::Integer: return "integer";
        case ValueKind::String: return "string";
        case ValueKind::Color: return "color";
        case ValueKind::Enum: return "enum";
        case ValueKind::TimeSeconds: return "time_seconds";
        case ValueKind::Point2dNormalized: return "point2d_normalized";
        case ValueKind::AssetRef: return "asset_ref";
        case ValueKind::Boolean: return "boolean";
    }
    return "number";
}

std::string_view class_category_name(ClassCategory category) {
    switch (category) {
        case ClassCategory::Asset: return "asset";
        case ClassCategory::TimelineElement: return "timeline_element";
        case ClassCategory::AnimationEffect: return "animation_effect";
    }
    return "asset";
}

namespace {

bool is_real_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

bool unit_components(const json& v, std::size_t n) {
    if (!v.is_array() || v.size() != n) return false;
    return std::all_of(v.begin(), v.end(), [](const json& c) {
        if (!is_real_number(c)) return false;
        double x = c.get<double>();
        return x >= 0.0 && x <= 1.0;
    });
}

std::string describe_interval(const Interval& in) {
    return "[" + json(in.min).dump() + ", " + json(in.max).dump() + "]";
}

}  // namespace

std::optional<std::string> MetaField::check(const json& value) const {
    auto in_interval = [&](double x) -> std::optional<std::string> {
        if (interval && (x < interval->min || x > interval->max)) {
            return name + ": " + json(x).dump() + " outside " + describe_interval(*interval);
        }
        return std::nullopt;
    };
    auto in_allowed = [&](const std::string& s) -> std::optional<std::string> {
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            return name + ": '" + s + "' is not one of the allowed values";
        }
        return std::nullopt;
    };

    switch (kind) {
        case ValueKind::Number:
        case ValueKind::TimeSeconds:
            if (!is_real_number(value)) return name + ": expected a finite number";
            return in_interval(value.get<double>());
        case ValueKind::Integer:
            if (!value.is_number_integer()) return name + ": expected an integer";
            return in_interval(static_cast<double>(value.get<std::int64_t>()));
        case ValueKind::String:
            if (!value.is_string()) return name + ": expected a string";
            return in_allowed(value.get<std::string>());
        case ValueKind::Enum:
            if (!value.is_string()) return name + ": expected an enum string";
            if (allowed.empty()) return name + ": enum field without allowed values";
            return in_allowed(value.get<std::string>());
        case ValueKind::Color:
            if (!unit_components(value, 4)) return name + ": expected [r,g,b,a] with channels in [0,1]";
            return std::nullopt;
        case ValueKind::Point2dNormalized:
            if (!unit_components(value, 2)) return name + ": expected [x,y] within the unit square";
            return std::nullopt;
        case ValueKind::AssetRef:
            if (!value.is_string()) return name + ": expected an asset id";
            if (!value.get<std::string>().empty() &&
                !ObjectId::well_formed(value.get<std::string>(), IdKind::Asset)) {
                return name + ": malformed asset id";
            }
            return std::nullopt;
        case ValueKind::Boolean:
            if (!value.is_boolean()) return name + ": expected a boolean";
            return std::nullopt;
    }
    return std::nullopt;
}

const MetaField* MetaClass::field(std::string_view field_name) const {
    for (const auto& f : fields) {
        if (f.name == field_name) return &f;
    }
    return nullptr;
}

std::string MetaRegistry::register_class(MetaClass def) {
    if (classes_.count(def.name) > 0) {
        throw Error(ErrorCode::DuplicateClass, "class already registered: " + def.name, {{"class", def.name}});
    }
    std::set<std::string> seen;
    for (const auto& f : def.fields) {
        if (!seen.insert(f.name).second) {
            throw Error(ErrorCode::InvalidField, "duplicate field name: " + f.name, {{"field", f.name}});
        }
        if (f.kind == ValueKind::Enum && f.allowed.empty()) {
            throw Error(ErrorCode::InvalidField, "enum field without allowed values: " + f.name,
                        {{"field", f.name}});
        }
        if (f.interval && f.interval->min > f.interval->max) {
            throw Error(ErrorCode::InvalidField, "empty range on field " + f.name, {{"field", f.name}});
        }
        if (auto why = f.check(f.default_value)) {
            throw Error(ErrorCode::InvalidField, "default does not satisfy range: " + *why, {{"field", f.name}});
        }
    }
    std::string name = def.name;
    classes_.emplace(name, std::move(def));
    return name;
}

bool MetaRegistry::contains(std::string_view name) const { return classes_.find(name) != classes_.end(); }

const MetaClass& MetaRegistry::get(std::string_view name) const {
    auto it = classes_.find(name);
    if (it == classes_.end()) {
        throw Error(ErrorCode::UnknownClass, "unknown class: " + std::string(name), {{"class", name}});
    }
    return it->second;
}

void MetaRegistry::check_partial(std::string_view class_name, const json& values) const {
    const MetaClass& cls = get(class_name);
    if (!values.is_object()) {
        throw Error(ErrorCode::RangeViolation, "field values must be an object");
    }
    for (const auto& [key, value] : values.items()) {
        const MetaField* f = cls.field(key);
        if (f == nullptr) {
            throw Error(ErrorCode::UnknownField, "unknown field " + key + " on " + cls.name,
                        {{"class", cls.name}, {"field", key}});
        }
        if (auto why = f->check(value)) {
            throw Error(ErrorCode::RangeViolation, *why, {{"class", cls.name}, {"field", key}});
        }
    }
}

json MetaRegistry::resolve_fields(std::string_view class_name, const json& overrides) const {
    check_partial(class_name, overrides);
    const MetaClass& cls = get(class_name);
    json out = json::object();
    for (const auto& f : cls.fields) {
        auto it = overrides.find(f.name);
        out[f.name] = it != overrides.end() ? *it : f.default_value;
    }
    return out;
}

MetaInstance MetaRegistry::instantiate(std::string_view class_name, const json& overrides, IdGenerator& ids) const {
    json fields = resolve_fields(class_name, overrides);
    const MetaClass& cls = get(class_name);
    return MetaInstance{ids.next(cls.id_kind), cls.name, std::move(fields)};
}

json reflect_field(const MetaField& f) {
    json entry = {
        {"name", f.name},
        {"kind", std::string(value_kind_name(f.kind))},
        {"default", f.default_value},
        {"description", f.description},
        {"tooltip", f.tooltip},
    };
    if (f.interval) entry["range"] = {{"min", f.interval->min}, {"max", f.interval->max}};
    if (!f.allowed.empty()) entry["allowed"] = f.allowed;
    if (f.unit) entry["unit"] = *f.unit;
    return entry;
}

json MetaRegistry::reflect_schema(std::string_view class_name) const {
    const MetaClass& cls = get(class_name);
    json fields = json::array();
    for (const auto& f : cls.fields) fields.push_back(reflect_field(f));
    return {
        {"class", cls.name},
        {"category", std::string(class_category_name(cls.category))},
        {"fields", std::move(fields)},
    };
}

}  // namespace tae
