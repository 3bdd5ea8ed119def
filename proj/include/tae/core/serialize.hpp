#pragma once

#include <string>
#include <string_view>

#include "tae/core/meta.hpp"
#include "tae/core/project.hpp"

namespace tae {

inline constexpr std::string_view kSchemaVersion = "tae-1";

// Canonical fragments. Objects use sorted keys, times are decimal seconds
// and colors are [r,g,b,a] arrays.
json style_to_json(const TextStyle& style);
json asset_to_json(const Asset& asset);
json track_to_json(const Track& track);
json clip_to_json(const Clip& clip);
json animation_to_json(const AnimationInstance& anim);
json log_entry_to_json(const OperationLogEntry& entry);

TextStyle style_from_json(const json& doc);
/// Parses a partial style; throws SchemaViolation on bad members.
TextStyleDelta style_delta_from_json(const json& doc);

/// Full project document: {schema_version, project}.
json serialize_project(const Project& project);

/**
 * @brief Parses a project document and checks every invariant.
 *
 * Throws CorruptDocument, UnsupportedSchemaVersion or DanglingReference.
 * When `registry` is given, animation presets must be registered classes.
 */
Project deserialize_project(const json& doc, const MetaRegistry* registry = nullptr);

/// Byte-stable text form of a document.
std::string canonical_text(const json& doc);

}  // namespace tae
