#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tae/core/enum_table.hpp"
#include "tae/core/error.hpp"
#include "tae/core/ids.hpp"
#include "tae/core/time.hpp"

namespace tae {

using Color = std::array<double, 4>;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

enum class Alignment { Left, Center, Right };
enum class AssetKind { Image, Audio, Video };
enum class TrackKind { Text, Video, Image, Audio, Element };
enum class Direction { Left, Right, Up, Down, None };
enum class Easing { Linear, EaseIn, EaseOut, EaseInOut };
enum class Phase { Enter, Emphasis, Exit };
enum class Actor { User, InlineAgent, ChatAgent };

inline constexpr EnumTable<Alignment, 3> kAlignmentNames{{{{Alignment::Left, "left"}, {Alignment::Center, "center"}, {Alignment::Right, "right"}}}};
inline constexpr EnumTable<AssetKind, 3> kAssetKindNames{{{{AssetKind::Image, "image"}, {AssetKind::Audio, "audio"}, {AssetKind::Video, "video"}}}};
inline constexpr EnumTable<TrackKind, 5> kTrackKindNames{{{{TrackKind::Text, "text"}, {TrackKind::Video, "video"}, {TrackKind::Image, "image"}, {TrackKind::Audio, "audio"}, {TrackKind::Element, "element"}}}};
inline constexpr EnumTable<Direction, 5> kDirectionNames{{{{Direction::Left, "left"}, {Direction::Right, "right"}, {Direction::Up, "up"}, {Direction::Down, "down"}, {Direction::None, "none"}}}};
inline constexpr EnumTable<Easing, 4> kEasingNames{{{{Easing::Linear, "linear"}, {Easing::EaseIn, "ease_in"}, {Easing::EaseOut, "ease_out"}, {Easing::EaseInOut, "ease_in_out"}}}};
inline constexpr EnumTable<Phase, 3> kPhaseNames{{{{Phase::Enter, "enter"}, {Phase::Emphasis, "emphasis"}, {Phase::Exit, "exit"}}}};
inline constexpr EnumTable<Actor, 3> kActorNames{{{{Actor::User, "user"}, {Actor::InlineAgent, "inline_agent"}, {Actor::ChatAgent, "chat_agent"}}}};

struct TextStyle {
    std::string font_family = "Inter";
    double font_size = 48.0;  // points
    Color color{1.0, 1.0, 1.0, 1.0};
    Point2 position{0.5, 0.5};  // normalized canvas coordinates
    Alignment alignment = Alignment::Center;

    bool operator==(const TextStyle&) const = default;
};

/// Partial style used by batch edits; unset members are left alone.
struct TextStyleDelta {
    std::optional<std::string> font_family;
    std::optional<double> font_size;
    std::optional<Color> color;
    std::optional<Point2> position;
    std::optional<Alignment> alignment;

    [[nodiscard]] bool empty() const {
        return !font_family && !font_size && !color && !position && !alignment;
    }
    void apply_to(TextStyle& style) const;
};

/// Returns the reason a style is invalid, if any.
inline constexpr double kMinFontSize = 1.0;
inline constexpr double kMaxFontSize = 1000.0;

std::optional<std::string> check_style(const TextStyle& style);

struct Asset {
    ObjectId id;
    AssetKind kind = AssetKind::Image;
    std::string name;
    std::string uri;
    std::optional<double> media_duration;  // seconds, audio/video only

    bool operator==(const Asset&) const = default;
};

struct Track {
    ObjectId id;
    TrackKind kind = TrackKind::Text;
    std::string name;
    std::int64_t order_index = 0;
    bool script_visible = true;

    bool operator==(const Track&) const = default;
};

struct TextPayload {
    std::string content;
    TextStyle style;
    bool operator==(const TextPayload&) const = default;
};

struct MediaPayload {
    ObjectId asset_ref;
    TimeMs trim_in;
    bool operator==(const MediaPayload&) const = default;
};

struct ElementPayload {
    std::string element_kind;
    json params = json::object();
    bool operator==(const ElementPayload&) const = default;
};

using ClipPayload = std::variant<TextPayload, MediaPayload, ElementPayload>;

struct Clip {
    ObjectId id;
    ObjectId track_id;
    TimeMs start;
    TimeMs duration;
    ClipPayload payload;

    [[nodiscard]] TimeMs end() const { return start + duration; }
    [[nodiscard]] bool is_text() const { return std::holds_alternative<TextPayload>(payload); }
    [[nodiscard]] const TextPayload* text() const { return std::get_if<TextPayload>(&payload); }
    [[nodiscard]] TextPayload* text() { return std::get_if<TextPayload>(&payload); }

    bool operator==(const Clip&) const = default;
};

bool payload_compatible(TrackKind track, const ClipPayload& payload);

/**
 * @brief A preset animation attached to one clip.
 *
 * `params` holds the resolved preset fields (duration, delay, speed,
 * direction, easing) as validated against the preset's meta class.
 */
struct AnimationInstance {
    ObjectId id;
    ObjectId clip_id;
    std::string preset;
    json params = json::object();
    Phase phase = Phase::Enter;

    bool operator==(const AnimationInstance&) const = default;
};

struct OperationLogEntry {
    std::int64_t seq = 0;
    std::int64_t timestamp_ms = 0;
    Actor actor = Actor::User;
    std::string tool;
    json args = json::object();
    bool ok = true;
    std::string detail;

    bool operator==(const OperationLogEntry&) const = default;
};

struct Canvas {
    int width_px = 1920;
    int height_px = 1080;
    bool operator==(const Canvas&) const = default;
};

/**
 * @brief The editable document: assets, tracks, clips and animations.
 *
 * Collections are keyed by id so iteration order is deterministic.
 * The id generator is runtime state and does not take part in equality.
 */
struct Project {
    ObjectId id;
    Canvas canvas;
    double fps = 30.0;
    std::map<ObjectId, Asset> assets;
    std::map<ObjectId, Track> tracks;
    std::map<ObjectId, Clip> clips;
    std::map<ObjectId, AnimationInstance> animations;
    std::int64_t revision = 0;
    std::vector<OperationLogEntry> operation_log;
    IdGenerator ids;

    bool operator==(const Project& o) const {
        return id == o.id && canvas == o.canvas && fps == o.fps && assets == o.assets && tracks == o.tracks &&
               clips == o.clips && animations == o.animations && revision == o.revision &&
               operation_log == o.operation_log;
    }

    /// Throwing lookups (UnknownTrack / UnknownClip / UnknownAsset / UnknownAnimation).
    [[nodiscard]] const Track& track(const ObjectId& tid) const;
    [[nodiscard]] Track& track(const ObjectId& tid);
    [[nodiscard]] const Clip& clip(const ObjectId& cid) const;
    [[nodiscard]] Clip& clip(const ObjectId& cid);
    [[nodiscard]] const Asset& asset(const ObjectId& aid) const;
    [[nodiscard]] const AnimationInstance& animation(const ObjectId& aid) const;

    /// Clips on a track sorted by start.
    [[nodiscard]] std::vector<const Clip*> clips_on_track(const ObjectId& tid) const;
    [[nodiscard]] std::vector<const AnimationInstance*> animations_of(const ObjectId& cid) const;
    [[nodiscard]] bool has_object(const ObjectId& oid) const;
    [[nodiscard]] std::int64_t next_order_index() const;
    /// End of the last clip; zero for an empty project.
    [[nodiscard]] TimeMs span() const;

    ObjectId new_id(IdKind kind) { return ids.next(kind); }
    /// Marks one committed mutation.
    void commit() { ++revision; }
};

Project make_project(std::uint64_t seed = 1, Canvas canvas = {}, double fps = 30.0);

/// Full scan of the document invariants. Empty result means valid.
std::vector<std::string> check_invariants(const Project& project);

/// Appends an operation log entry with the next sequence number.
const OperationLogEntry& append_log(Project& project, Actor actor, std::string tool, json args, bool ok,
                                    std::string detail, std::int64_t timestamp_ms);

}  // namespace tae
