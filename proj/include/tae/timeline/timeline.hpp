#pragma once

#include <optional>
#include <string>
#include <utility>

#include "tae/core/meta.hpp"
#include "tae/core/project.hpp"

namespace tae {

// Timeline mutations. Each validates first and mutates only on success, so
// a thrown error leaves the project untouched. Every successful call
// commits exactly one revision.

Asset add_asset(Project& project, AssetKind kind, std::string name, std::string uri,
                std::optional<double> media_duration);
void remove_asset(Project& project, const ObjectId& asset);

/// `order_index` defaults to one past the highest existing index.
Track add_track(Project& project, TrackKind kind, std::string name, std::optional<std::int64_t> order_index = {},
                bool script_visible = true);
/// Removes the track with its clips and their animations.
void remove_track(Project& project, const ObjectId& track);

/// First clip on `track` overlapping [start, start+duration), ignoring `exclude`.
std::optional<ObjectId> find_overlap(const Project& project, const ObjectId& track, TimeMs start, TimeMs duration,
                                     const std::optional<ObjectId>& exclude = std::nullopt);

Clip add_clip(Project& project, const ObjectId& track, TimeMs start, TimeMs duration, ClipPayload payload);
Clip move_clip(Project& project, const ObjectId& clip, const std::optional<ObjectId>& new_track, TimeMs new_start);
Clip resize_clip(Project& project, const ObjectId& clip, TimeMs new_start, TimeMs new_duration);
void remove_clip(Project& project, const ObjectId& clip);

/**
 * @brief Inserts or replaces a clip after full validation.
 *
 * Checks track, payload kind, referenced asset, style, timing and overlap
 * (ignoring the clip's own previous placement). Animations stay attached.
 */
Clip put_clip(Project& project, Clip candidate);

/// Replaces the whole payload (kind must stay compatible with the track).
Clip set_payload(Project& project, const ObjectId& clip, ClipPayload payload);
Clip set_text(Project& project, const ObjectId& clip, std::string content);
Clip set_style(Project& project, const ObjectId& clip, const TextStyle& style);

/**
 * @brief Splits a clip at `at`.
 *
 * Text is cut at the code point boundary nearest to the time fraction.
 * The first half keeps the original id; exit animations move to the
 * second half, enter and emphasis animations stay on the first.
 */
std::pair<Clip, Clip> split_clip(Project& project, const ObjectId& clip, TimeMs at);

/// Split with an explicit text cut (code point offset); shared by script editing.
std::pair<Clip, Clip> split_clip_with_offset(Project& project, const ObjectId& clip, TimeMs at,
                                             std::size_t char_offset);

/// Code point boundary nearest to `fraction` of a text of `length` code points.
std::size_t nearest_char_boundary(double fraction, std::size_t length);

/**
 * @brief Merges two neighbouring clips on one track into the earlier one.
 *
 * Text content is concatenated directly; duplicate (preset, phase)
 * animations keep the earlier clip's instance.
 */
Clip merge_clips(Project& project, const ObjectId& a, const ObjectId& b);

AnimationInstance attach_animation(Project& project, const MetaRegistry& registry, const ObjectId& clip,
                                   const std::string& preset, const json& params,
                                   std::optional<Phase> phase = std::nullopt);
AnimationInstance update_animation(Project& project, const MetaRegistry& registry, const ObjectId& anim,
                                   const json& params, std::optional<Phase> phase = std::nullopt);
void detach_animation(Project& project, const ObjectId& anim);

}  // namespace tae
