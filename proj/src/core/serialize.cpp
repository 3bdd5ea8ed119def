#include "tae/core/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tae {

namespace {

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptDocument, what); }

const json& member(const json& obj, const char* key) {
    if (!obj.is_object()) corrupt(std::string("expected an object around '") + key + "'");
    auto it = obj.find(key);
    if (it == obj.end()) corrupt(std::string("missing key '") + key + "'");
    return *it;
}

std::string get_string(const json& obj, const char* key) {
    const json& v = member(obj, key);
    if (!v.is_string()) corrupt(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

double get_number(const json& obj, const char* key) {
    const json& v = member(obj, key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) corrupt(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

std::int64_t get_integer(const json& obj, const char* key) {
    const json& v = member(obj, key);
    if (!v.is_number_integer()) corrupt(std::string("'") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

bool get_bool(const json& obj, const char* key) {
    const json& v = member(obj, key);
    if (!v.is_boolean()) corrupt(std::string("'") + key + "' must be a boolean");
    return v.get<bool>();
}

ObjectId get_id(const json& obj, const char* key) { return ObjectId(get_string(obj, key)); }

template <class Table>
auto get_enum(const json& obj, const char* key, const Table& table) {
    std::string text = get_string(obj, key);
    auto value = table.parse(text);
    if (!value) corrupt(std::string("'") + key + "' has unknown value '" + text + "'");
    return *value;
}

json seconds(TimeMs t) { return t.seconds(); }

TimeMs get_time(const json& obj, const char* key) { return TimeMs::from_seconds(get_number(obj, key)); }

Color color_from(const json& v) {
    if (!v.is_array() || v.size() != 4) corrupt("color must be [r,g,b,a]");
    Color c{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (!v[i].is_number()) corrupt("color channels must be numbers");
        c[i] = v[i].get<double>();
    }
    return c;
}

Point2 point_from(const json& v) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) corrupt("position must be [x,y]");
    return Point2{v[0].get<double>(), v[1].get<double>()};
}

json payload_to_json(const ClipPayload& payload) {
    return std::visit(
        [](const auto& p) -> json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, TextPayload>) {
                return {{"type", "text"}, {"content", p.content}, {"style", style_to_json(p.style)}};
            } else if constexpr (std::is_same_v<P, MediaPayload>) {
                return {{"type", "media"}, {"asset_ref", p.asset_ref.value}, {"trim_in", seconds(p.trim_in)}};
            } else {
                return {{"type", "element"}, {"element_kind", p.element_kind}, {"params", p.params}};
            }
        },
        payload);
}

ClipPayload payload_from_json(const json& doc) {
    std::string type = get_string(doc, "type");
    if (type == "text") return TextPayload{get_string(doc, "content"), style_from_json(member(doc, "style"))};
    if (type == "media") return MediaPayload{get_id(doc, "asset_ref"), get_time(doc, "trim_in")};
    if (type == "element") {
        const json& params = member(doc, "params");
        if (!params.is_object()) corrupt("element params must be an object");
        return ElementPayload{get_string(doc, "element_kind"), params};
    }
    corrupt("unknown payload type '" + type + "'");
}

const json& array_member(const json& obj, const char* key) {
    const json& v = member(obj, key);
    if (!v.is_array()) corrupt(std::string("'") + key + "' must be an array");
    return v;
}

}  // namespace

json style_to_json(const TextStyle& style) {
    return {
        {"font_family", style.font_family},
        {"font_size", style.font_size},
        {"color", style.color},
        {"position", {style.position.x, style.position.y}},
        {"alignment", std::string(kAlignmentNames.name(style.alignment))},
    };
}

TextStyle style_from_json(const json& doc) {
    TextStyle s;
    s.font_family = get_string(doc, "font_family");
    s.font_size = get_number(doc, "font_size");
    s.color = color_from(member(doc, "color"));
    s.position = point_from(member(doc, "position"));
    s.alignment = get_enum(doc, "alignment", kAlignmentNames);
    return s;
}

TextStyleDelta style_delta_from_json(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::SchemaViolation, "style delta must be an object");
    TextStyleDelta delta;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "font_family") {
                if (!value.is_string()) corrupt("font_family must be a string");
                delta.font_family = value.get<std::string>();
            } else if (key == "font_size") {
                if (!value.is_number()) corrupt("font_size must be a number");
                delta.font_size = value.get<double>();
            } else if (key == "color") {
                delta.color = color_from(value);
            } else if (key == "position") {
                delta.position = point_from(value);
            } else if (key == "alignment") {
                auto a = value.is_string() ? kAlignmentNames.parse(value.get<std::string>()) : std::nullopt;
                if (!a) corrupt("alignment must be left, center or right");
                delta.alignment = *a;
            } else {
                corrupt("unknown style member '" + key + "'");
            }
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::SchemaViolation, e.what());
    }
    TextStyle probe;
    delta.apply_to(probe);
    if (auto why = check_style(probe)) throw Error(ErrorCode::RangeViolation, *why);
    return delta;
}

json asset_to_json(const Asset& a) {
    json out = {
        {"id", a.id.value},
        {"kind", std::string(kAssetKindNames.name(a.kind))},
        {"name", a.name},
        {"uri", a.uri},
    };
    if (a.media_duration) out["media_duration"] = *a.media_duration;
    return out;
}

json track_to_json(const Track& t) {
    return {
        {"id", t.id.value},
        {"kind", std::string(kTrackKindNames.name(t.kind))},
        {"name", t.name},
        {"order_index", t.order_index},
        {"script_visible", t.script_visible},
    };
}

json clip_to_json(const Clip& c) {
    return {
        {"id", c.id.value},
        {"track_id", c.track_id.value},
        {"start", seconds(c.start)},
        {"duration", seconds(c.duration)},
        {"payload", payload_to_json(c.payload)},
    };
}

json animation_to_json(const AnimationInstance& a) {
    return {
        {"id", a.id.value},
        {"clip_id", a.clip_id.value},
        {"preset", a.preset},
        {"params", a.params},
        {"phase", std::string(kPhaseNames.name(a.phase))},
    };
}

json log_entry_to_json(const OperationLogEntry& e) {
    return {
        {"seq", e.seq},
        {"timestamp_ms", e.timestamp_ms},
        {"actor", std::string(kActorNames.name(e.actor))},
        {"tool", e.tool},
        {"args", e.args},
        {"outcome", e.ok ? "ok" : "error"},
        {"detail", e.detail},
    };
}

json serialize_project(const Project& p) {
    json assets = json::array();
    for (const auto& [id, a] : p.assets) assets.push_back(asset_to_json(a));
    json tracks = json::array();
    for (const auto& [id, t] : p.tracks) tracks.push_back(track_to_json(t));
    json clips = json::array();
    for (const auto& [id, c] : p.clips) clips.push_back(clip_to_json(c));
    json animations = json::array();
    for (const auto& [id, a] : p.animations) animations.push_back(animation_to_json(a));
    json log = json::array();
    for (const auto& e : p.operation_log) log.push_back(log_entry_to_json(e));

    return {
        {"schema_version", std::string(kSchemaVersion)},
        {"project",
         {
             {"id", p.id.value},
             {"canvas", {{"width_px", p.canvas.width_px}, {"height_px", p.canvas.height_px}}},
             {"fps", p.fps},
             {"revision", p.revision},
             {"assets", std::move(assets)},
             {"tracks", std::move(tracks)},
             {"clips", std::move(clips)},
             {"animations", std::move(animations)},
             {"operation_log", std::move(log)},
         }},
    };
}

Project deserialize_project(const json& doc, const MetaRegistry* registry) {
    if (!doc.is_object()) corrupt("project document must be an object");
    auto version = doc.find("schema_version");
    if (version == doc.end() || !version->is_string()) corrupt("missing schema_version");
    if (*version != kSchemaVersion) {
        throw Error(ErrorCode::UnsupportedSchemaVersion, "unsupported schema version " + version->get<std::string>(),
                    {{"schema_version", *version}});
    }
    const json& body = member(doc, "project");

    Project p;
    p.id = get_id(body, "id");
    const json& canvas = member(body, "canvas");
    p.canvas.width_px = static_cast<int>(get_integer(canvas, "width_px"));
    p.canvas.height_px = static_cast<int>(get_integer(canvas, "height_px"));
    p.fps = get_number(body, "fps");
    p.revision = get_integer(body, "revision");

    auto insert_unique = [](auto& map, const ObjectId& id, auto value) {
        if (!map.emplace(id, std::move(value)).second) corrupt("duplicate id " + id.value);
    };

    for (const json& a : array_member(body, "assets")) {
        Asset asset;
        asset.id = get_id(a, "id");
        asset.kind = get_enum(a, "kind", kAssetKindNames);
        asset.name = get_string(a, "name");
        asset.uri = get_string(a, "uri");
        if (a.contains("media_duration")) asset.media_duration = get_number(a, "media_duration");
        insert_unique(p.assets, asset.id, asset);
    }
    for (const json& t : array_member(body, "tracks")) {
        Track track;
        track.id = get_id(t, "id");
        track.kind = get_enum(t, "kind", kTrackKindNames);
        track.name = get_string(t, "name");
        track.order_index = get_integer(t, "order_index");
        track.script_visible = get_bool(t, "script_visible");
        insert_unique(p.tracks, track.id, track);
    }
    for (const json& c : array_member(body, "clips")) {
        Clip clip;
        clip.id = get_id(c, "id");
        clip.track_id = get_id(c, "track_id");
        clip.start = get_time(c, "start");
        clip.duration = get_time(c, "duration");
        clip.payload = payload_from_json(member(c, "payload"));
        insert_unique(p.clips, clip.id, clip);
    }
    for (const json& a : array_member(body, "animations")) {
        AnimationInstance anim;
        anim.id = get_id(a, "id");
        anim.clip_id = get_id(a, "clip_id");
        anim.preset = get_string(a, "preset");
        anim.params = member(a, "params");
        if (!anim.params.is_object()) corrupt("animation params must be an object");
        anim.phase = get_enum(a, "phase", kPhaseNames);
        insert_unique(p.animations, anim.id, anim);
    }
    for (const json& e : array_member(body, "operation_log")) {
        OperationLogEntry entry;
        entry.seq = get_integer(e, "seq");
        entry.timestamp_ms = get_integer(e, "timestamp_ms");
        entry.actor = get_enum(e, "actor", kActorNames);
        entry.tool = get_string(e, "tool");
        entry.args = member(e, "args");
        std::string outcome = get_string(e, "outcome");
        if (outcome != "ok" && outcome != "error") corrupt("outcome must be ok or error");
        entry.ok = outcome == "ok";
        entry.detail = get_string(e, "detail");
        p.operation_log.push_back(std::move(entry));
    }

    // Reference checks come first so they report as dangling references.
    for (const auto& [id, c] : p.clips) {
        if (p.tracks.count(c.track_id) == 0) {
            throw Error(ErrorCode::DanglingReference, "clip " + id.value + " references missing track " + c.track_id.value,
                        {{"id", id.value}, {"reference", c.track_id.value}});
        }
        if (const auto* media = std::get_if<MediaPayload>(&c.payload); media && p.assets.count(media->asset_ref) == 0) {
            throw Error(ErrorCode::DanglingReference,
                        "clip " + id.value + " references missing asset " + media->asset_ref.value,
                        {{"id", id.value}, {"reference", media->asset_ref.value}});
        }
    }
    for (const auto& [id, a] : p.animations) {
        if (p.clips.count(a.clip_id) == 0) {
            throw Error(ErrorCode::DanglingReference,
                        "animation " + id.value + " references missing clip " + a.clip_id.value,
                        {{"id", id.value}, {"reference", a.clip_id.value}});
        }
        if (registry != nullptr) {
            if (!registry->contains(a.preset) ||
                registry->get(a.preset).category != ClassCategory::AnimationEffect) {
                corrupt("animation " + id.value + " uses unknown preset " + a.preset);
            }
            try {
                registry->check_partial(a.preset, a.params);
            } catch (const Error& e) {
                corrupt("animation " + id.value + ": " + e.what());
            }
        }
    }

    auto issues = check_invariants(p);
    if (!issues.empty()) corrupt(issues.front());

    std::uint64_t seed = std::hash<std::string>{}(p.id.value) ^ static_cast<std::uint64_t>(p.revision);
    p.ids.reseed(seed);
    for (const auto& [id, a] : p.assets) p.ids.reserve(id);
    for (const auto& [id, t] : p.tracks) p.ids.reserve(id);
    for (const auto& [id, c] : p.clips) p.ids.reserve(id);
    for (const auto& [id, a] : p.animations) p.ids.reserve(id);
    return p;
}

std::string canonical_text(const json& doc) { return doc.dump(); }

}  // namespace tae
