#pragma once

#include <optional>
#include <string>

#include "tae/core/ids.hpp"
#include "tae/core/meta.hpp"

namespace tae {

/// JSON-schema fragment for one meta field, carrying its exact range.
json field_schema(const MetaField& field);

/// Schema for an ObjectId of the given kind.
json id_schema(IdKind kind, std::string description);

/**
 * @brief Validates `value` against the JSON-schema subset emitted here.
 *
 * Supported keywords: type, enum, minimum, maximum, pattern, items,
 * minItems, maxItems, properties, required, additionalProperties=false.
 * Returns "<path>: <reason>" for the first violation.
 */
std::optional<std::string> validate_schema(const json& value, const json& schema, const std::string& path = "$");

}  // namespace tae
