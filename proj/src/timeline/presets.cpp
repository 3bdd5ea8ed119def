#include "tae/timeline/presets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tae {

const std::vector<PresetSpec>& preset_catalog() {
    static const std::vector<PresetSpec> catalog = {
        {"bounce", Phase::Emphasis, Direction::Up, Easing::Linear, "Text hops up and settles in damped bounces."},
        {"color_pulse", Phase::Emphasis, Direction::None, Easing::EaseInOut,
         "Text color brightens toward white and returns."},
        {"fade_in", Phase::Enter, Direction::None, Easing::EaseOut, "Opacity rises from transparent to opaque."},
        {"fade_out", Phase::Exit, Direction::None, Easing::EaseIn, "Opacity falls from opaque to transparent."},
        {"scale_pop", Phase::Enter, Direction::None, Easing::EaseOut,
         "Text grows from half size with a slight overshoot while fading in."},
        {"slide_in", Phase::Enter, Direction::Left, Easing::EaseOut,
         "Text slides into place from the chosen side."},
        {"slide_out", Phase::Exit, Direction::Right, Easing::EaseIn, "Text slides away toward the chosen side."},
        {"typewriter", Phase::Enter, Direction::None, Easing::Linear, "Characters are revealed one by one."},
    };
    return catalog;
}

const PresetSpec* find_preset(std::string_view name) {
    const auto& catalog = preset_catalog();
    auto it = std::find_if(catalog.begin(), catalog.end(), [&](const PresetSpec& p) { return p.name == name; });
    return it == catalog.end() ? nullptr : &*it;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& p : preset_catalog()) out.emplace_back(p.name);
    return out;
}

Point2 direction_vector(Direction direction) {
    switch (direction) {
        case Direction::Left: return {-1.0, 0.0};
        case Direction::Right: return {1.0, 0.0};
        case Direction::Up: return {0.0, -1.0};  // canvas y grows downward
        case Direction::Down: return {0.0, 1.0};
        case Direction::None: return {0.0, 0.0};
    }
    return {0.0, 0.0};
}

namespace {

// 4e(1-e): zero at both ends, one at the midpoint, exact in floating point at e=0 and e=1.
double hump(double e) { return 4.0 * e * (1.0 - e); }

}  // namespace

AnimationDelta preset_delta(std::string_view preset, double e, Direction direction) {
    e = std::clamp(e, 0.0, 1.0);
    AnimationDelta d;
    Point2 dir = direction_vector(direction);

    if (preset == "fade_in") {
        d.opacity = e;
    } else if (preset == "fade_out") {
        d.opacity = 1.0 - e;
    } else if (preset == "slide_in") {
        double k = kSlideDistance * (1.0 - e);
        d.offset = {dir.x * k + 0.0, dir.y * k + 0.0};
    } else if (preset == "slide_out") {
        double k = kSlideDistance * e;
        d.offset = {dir.x * k + 0.0, dir.y * k + 0.0};
    } else if (preset == "scale_pop") {
        d.scale = kPopStartScale + (1.0 - kPopStartScale) * e + kPopOvershoot * hump(e);
        d.opacity = e;
    } else if (preset == "typewriter") {
        d.reveal = e;
    } else if (preset == "bounce") {
        // Damped |sin| over three half-periods; the (1-e) envelope pins e=1 to zero.
        double lift = kBounceHeight * std::abs(std::sin(kBounceHalfPeriods * std::numbers::pi * e)) * (1.0 - e);
        Point2 up = direction == Direction::None ? Point2{0.0, -1.0} : dir;
        d.offset = {up.x * lift + 0.0, up.y * lift + 0.0};
    } else if (preset == "color_pulse") {
        d.whiten = hump(e);
    } else {
        throw Error(ErrorCode::UnknownPreset, "unknown preset " + std::string(preset), {{"preset", preset}});
    }
    return d;
}

namespace {

MetaField time_field(std::string name, double min, double max, double def, std::string description,
                     std::string tooltip) {
    MetaField f;
    f.name = std::move(name);
    f.kind = ValueKind::TimeSeconds;
    f.interval = Interval{min, max};
    f.default_value = def;
    f.description = std::move(description);
    f.tooltip = std::move(tooltip);
    f.unit = "s";
    return f;
}

MetaField number_field(std::string name, double min, double max, double def, std::string description,
                       std::string tooltip, std::optional<std::string> unit = std::nullopt) {
    MetaField f;
    f.name = std::move(name);
    f.kind = ValueKind::Number;
    f.interval = Interval{min, max};
    f.default_value = def;
    f.description = std::move(description);
    f.tooltip = std::move(tooltip);
    f.unit = std::move(unit);
    return f;
}

MetaField enum_field(std::string name, std::vector<std::string> allowed, std::string def, std::string description,
                     std::string tooltip) {
    MetaField f;
    f.name = std::move(name);
    f.kind = ValueKind::Enum;
    f.allowed = std::move(allowed);
    f.default_value = std::move(def);
    f.description = std::move(description);
    f.tooltip = std::move(tooltip);
    return f;
}

MetaField simple_field(std::string name, ValueKind kind, json def, std::string description, std::string tooltip) {
    MetaField f;
    f.name = std::move(name);
    f.kind = kind;
    f.default_value = std::move(def);
    f.description = std::move(description);
    f.tooltip = std::move(tooltip);
    return f;
}

constexpr double kMaxTimelineSeconds = 86400.0;

}  // namespace

MetaClass make_preset_class(const PresetSpec& spec) {
    MetaClass cls;
    cls.name = std::string(spec.name);
    cls.category = ClassCategory::AnimationEffect;
    cls.id_kind = IdKind::Anim;
    cls.parent = ParentRef{"clip_id", IdKind::Clip};
    cls.fields = {
        time_field("duration", 0.001, 60.0, 0.5, std::string(spec.description) + " Length of the animation.",
                   "Animation length in seconds"),
        time_field("delay", 0.0, 60.0, 0.0, "Wait before the animation starts, measured from its anchor.",
                   "Delay in seconds"),
        number_field("speed", 0.1, 10.0, 1.0, "Playback rate multiplier; 2 plays twice as fast.", "Speed multiplier",
                     "x"),
        enum_field("direction", kDirectionNames.names(), std::string(kDirectionNames.name(spec.default_direction)),
                   "Travel direction for moving presets.", "Direction"),
        enum_field("easing", kEasingNames.names(), std::string(kEasingNames.name(spec.default_easing)),
                   "Easing curve applied to progress.", "Easing"),
    };
    return cls;
}

std::vector<MetaClass> builtin_element_classes() {
    MetaClass asset;
    asset.name = "asset";
    asset.category = ClassCategory::Asset;
    asset.id_kind = IdKind::Asset;
    asset.fields = {
        enum_field("kind", kAssetKindNames.names(), "image", "Media type of the resource.", "Asset kind"),
        simple_field("name", ValueKind::String, "", "Display name of the resource.", "Name"),
        simple_field("uri", ValueKind::String, "", "Location of the media bytes.", "URI"),
        number_field("media_duration", 0.0, kMaxTimelineSeconds, 0.0,
                     "Length of audio or video media in seconds; 0 for images.", "Media length", "s"),
    };

    MetaClass track;
    track.name = "track";
    track.category = ClassCategory::TimelineElement;
    track.id_kind = IdKind::Track;
    MetaField order = simple_field("order_index", ValueKind::Integer, 0,
                                   "Stacking position; lower tracks draw first. Must be unique.", "Order");
    order.interval = Interval{0.0, 1000000.0};
    track.fields = {
        enum_field("kind", kTrackKindNames.names(), "text", "What the track holds.", "Track kind"),
        simple_field("name", ValueKind::String, "Track", "Display name of the track.", "Name"),
        order,
        simple_field("script_visible", ValueKind::Boolean, true, "Whether the script panel shows this track's lines.",
                     "Show in script"),
    };

    MetaClass clip;
    clip.name = "clip";
    clip.category = ClassCategory::TimelineElement;
    clip.id_kind = IdKind::Clip;
    clip.parent = ParentRef{"track_id", IdKind::Track};
    clip.fields = {
        time_field("start", 0.0, kMaxTimelineSeconds, 0.0, "Time the clip appears on the timeline.", "Start time"),
        time_field("duration", 0.001, kMaxTimelineSeconds, 2.0, "How long the clip stays on screen.", "Duration"),
        simple_field("content", ValueKind::String, "", "Text shown by a text clip.", "Text"),
        simple_field("font_family", ValueKind::String, "Inter", "Font family of a text clip.", "Font"),
        number_field("font_size", kMinFontSize, kMaxFontSize, 48.0, "Font size of a text clip.", "Font size", "pt"),
        simple_field("color", ValueKind::Color, json::array({1.0, 1.0, 1.0, 1.0}), "Text color as [r,g,b,a].",
                     "Color"),
        simple_field("position", ValueKind::Point2dNormalized, json::array({0.5, 0.5}),
                     "Anchor position of the text in normalized canvas units.", "Position"),
        enum_field("alignment", kAlignmentNames.names(), "center", "Horizontal text alignment.", "Alignment"),
        simple_field("asset_ref", ValueKind::AssetRef, "", "Asset played by a media clip.", "Asset"),
        time_field("trim_in", 0.0, kMaxTimelineSeconds, 0.0, "Offset into the media where playback begins.",
                   "Trim in"),
        simple_field("element_kind", ValueKind::String, "rect", "Shape drawn by an element clip.", "Element"),
    };
    return {asset, track, clip};
}

MetaRegistry make_builtin_registry() {
    MetaRegistry registry;
    for (auto& cls : builtin_element_classes()) registry.register_class(std::move(cls));
    for (const auto& spec : preset_catalog()) registry.register_class(make_preset_class(spec));
    return registry;
}

}  // namespace tae
