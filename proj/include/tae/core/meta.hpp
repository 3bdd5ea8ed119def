#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tae/core/error.hpp"
#include "tae/core/ids.hpp"

namespace tae {

enum class ValueKind {
    Number,
    Integer,
    String,
    Color,
    Enum,
    TimeSeconds,
    Point2dNormalized,
    AssetRef,
    Boolean,
};

enum class ClassCategory { Asset, TimelineElement, AnimationEffect };

std::string_view value_kind_name(ValueKind kind);
std::string_view class_category_name(ClassCategory category);

struct Interval {
    double min = 0.0;
    double max = 0.0;
    bool operator==(const Interval&) const = default;
};

/**
 * @brief One reflected attribute of a meta class.
 *
 * `interval` applies to numeric kinds, `allowed` to enum and string kinds.
 */
struct MetaField {
    std::string name;
    ValueKind kind = ValueKind::Number;
    std::optional<Interval> interval;
    std::vector<std::string> allowed;
    json default_value;
    std::string description;
    std::string tooltip;
    std::optional<std::string> unit;

    /// Returns a human-readable reason when `value` is not acceptable.
    [[nodiscard]] std::optional<std::string> check(const json& value) const;
};

/// Selector parameter linking instances to an owning object (clip -> track).
struct ParentRef {
    std::string param;
    IdKind kind;
};

struct MetaClass {
    std::string name;
    ClassCategory category = ClassCategory::TimelineElement;
    std::vector<MetaField> fields;
    IdKind id_kind = IdKind::Clip;
    std::optional<ParentRef> parent;

    [[nodiscard]] const MetaField* field(std::string_view field_name) const;
};

struct MetaInstance {
    ObjectId id;
    std::string class_name;
    json fields = json::object();
};

/**
 * @brief Registry of meta classes: the source of inspector schemas and
 * derived tool descriptors.
 */
class MetaRegistry {
public:
    /// Throws DuplicateClass or InvalidField.
    std::string register_class(MetaClass def);

    [[nodiscard]] bool contains(std::string_view name) const;
    /// Throws UnknownClass.
    [[nodiscard]] const MetaClass& get(std::string_view name) const;
    [[nodiscard]] const std::map<std::string, MetaClass, std::less<>>& classes() const { return classes_; }
    [[nodiscard]] bool empty() const { return classes_.empty(); }

    /// Validates `overrides` and fills the remaining fields with defaults.
    /// Throws UnknownClass, UnknownField or RangeViolation.
    [[nodiscard]] json resolve_fields(std::string_view class_name, const json& overrides) const;

    /// Validates a partial update against the class. Unset fields are left out.
    void check_partial(std::string_view class_name, const json& values) const;

    MetaInstance instantiate(std::string_view class_name, const json& overrides, IdGenerator& ids) const;

    /// Deterministic parameter schema document, fields in declaration order.
    [[nodiscard]] json reflect_schema(std::string_view class_name) const;

private:
    std::map<std::string, MetaClass, std::less<>> classes_;
};

json reflect_field(const MetaField& field);

}  // namespace tae
