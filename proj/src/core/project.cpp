#include "tae/core/project.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tae {

void TextStyleDelta::apply_to(TextStyle& style) const {
    if (font_family) style.font_family = *font_family;
    if (font_size) style.font_size = *font_size;
    if (color) style.color = *color;
    if (position) style.position = *position;
    if (alignment) style.alignment = *alignment;
}

std::optional<std::string> check_style(const TextStyle& style) {
    if (!std::isfinite(style.font_size) || style.font_size < kMinFontSize || style.font_size > kMaxFontSize) {
        return "font_size must lie in [1,1000]";
    }
    for (double c : style.color) {
        if (!std::isfinite(c) || c < 0.0 || c > 1.0) return "color channels must lie in [0,1]";
    }
    auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (!unit(style.position.x) || !unit(style.position.y)) return "position must lie in the unit square";
    return std::nullopt;
}

bool payload_compatible(TrackKind track, const ClipPayload& payload) {
    return std::visit(
        [track](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, TextPayload>) {
                return track == TrackKind::Text;
            } else if constexpr (std::is_same_v<P, MediaPayload>) {
                return track == TrackKind::Video || track == TrackKind::Image || track == TrackKind::Audio;
            } else {
                return track == TrackKind::Element;
            }
        },
        payload);
}

const Track& Project::track(const ObjectId& tid) const {
    auto it = tracks.find(tid);
    if (it == tracks.end()) throw Error(ErrorCode::UnknownTrack, "unknown track " + tid.value, {{"id", tid.value}});
    return it->second;
}

Track& Project::track(const ObjectId& tid) {
    return const_cast<Track&>(std::as_const(*this).track(tid));
}

const Clip& Project::clip(const ObjectId& cid) const {
    auto it = clips.find(cid);
    if (it == clips.end()) throw Error(ErrorCode::UnknownClip, "unknown clip " + cid.value, {{"id", cid.value}});
    return it->second;
}

Clip& Project::clip(const ObjectId& cid) { return const_cast<Clip&>(std::as_const(*this).clip(cid)); }

const Asset& Project::asset(const ObjectId& aid) const {
    auto it = assets.find(aid);
    if (it == assets.end()) throw Error(ErrorCode::UnknownAsset, "unknown asset " + aid.value, {{"id", aid.value}});
    return it->second;
}

const AnimationInstance& Project::animation(const ObjectId& aid) const {
    auto it = animations.find(aid);
    if (it == animations.end()) {
        throw Error(ErrorCode::UnknownAnimation, "unknown animation " + aid.value, {{"id", aid.value}});
    }
    return it->second;
}

std::vector<const Clip*> Project::clips_on_track(const ObjectId& tid) const {
    std::vector<const Clip*> out;
    for (const auto& [cid, c] : clips) {
        if (c.track_id == tid) out.push_back(&c);
    }
    std::sort(out.begin(), out.end(), [](const Clip* a, const Clip* b) {
        return a->start != b->start ? a->start < b->start : a->id < b->id;
    });
    return out;
}

std::vector<const AnimationInstance*> Project::animations_of(const ObjectId& cid) const {
    std::vector<const AnimationInstance*> out;
    for (const auto& [aid, a] : animations) {
        if (a.clip_id == cid) out.push_back(&a);
    }
    return out;
}

bool Project::has_object(const ObjectId& oid) const {
    return assets.count(oid) > 0 || tracks.count(oid) > 0 || clips.count(oid) > 0 || animations.count(oid) > 0;
}

std::int64_t Project::next_order_index() const {
    std::int64_t next = 0;
    for (const auto& [tid, t] : tracks) next = std::max(next, t.order_index + 1);
    return next;
}

TimeMs Project::span() const {
    TimeMs end{0};
    for (const auto& [cid, c] : clips) end = std::max(end, c.end());
    return end;
}

Project make_project(std::uint64_t seed, Canvas canvas, double fps) {
    Project p;
    p.ids.reseed(seed);
    p.canvas = canvas;
    p.fps = fps;
    // "proj" is not an in-project object kind; reuse the generator for the suffix only.
    ObjectId raw = p.ids.next(IdKind::Asset);
    p.id = ObjectId("proj" + raw.value.substr(raw.value.find('_')));
    return p;
}

std::vector<std::string> check_invariants(const Project& project) {
    std::vector<std::string> issues;
    std::set<ObjectId> seen;
    auto note_id = [&](const ObjectId& id, IdKind kind) {
        if (!ObjectId::well_formed(id.value, kind)) issues.push_back("malformed id " + id.value);
        if (!seen.insert(id).second) issues.push_back("duplicate id " + id.value);
    };

    if (project.fps <= 0.0 || !std::isfinite(project.fps)) issues.push_back("fps must be > 0");
    if (project.canvas.width_px <= 0 || project.canvas.height_px <= 0) issues.push_back("canvas must be non-empty");

    for (const auto& [aid, a] : project.assets) {
        note_id(aid, IdKind::Asset);
        bool timed = a.kind == AssetKind::Audio || a.kind == AssetKind::Video;
        if (timed != a.media_duration.has_value()) {
            issues.push_back("asset " + aid.value + ": media_duration present iff audio/video");
        }
        if (a.media_duration && !(*a.media_duration > 0.0)) {
            issues.push_back("asset " + aid.value + ": media_duration must be > 0");
        }
    }

    std::set<std::int64_t> orders;
    for (const auto& [tid, t] : project.tracks) {
        note_id(tid, IdKind::Track);
        if (t.order_index < 0) issues.push_back("track " + tid.value + ": negative order_index");
        if (!orders.insert(t.order_index).second) issues.push_back("track " + tid.value + ": order_index not unique");
    }

    for (const auto& [cid, c] : project.clips) {
        note_id(cid, IdKind::Clip);
        if (c.duration.ms <= 0) issues.push_back("clip " + cid.value + ": duration must be > 0");
        if (c.start.ms < 0) issues.push_back("clip " + cid.value + ": start must be >= 0");
        auto tit = project.tracks.find(c.track_id);
        if (tit == project.tracks.end()) {
            issues.push_back("clip " + cid.value + ": dangling track " + c.track_id.value);
        } else if (!payload_compatible(tit->second.kind, c.payload)) {
            issues.push_back("clip " + cid.value + ": payload incompatible with track kind");
        }
        if (const auto* media = std::get_if<MediaPayload>(&c.payload)) {
            if (project.assets.count(media->asset_ref) == 0) {
                issues.push_back("clip " + cid.value + ": dangling asset " + media->asset_ref.value);
            }
            if (media->trim_in.ms < 0) issues.push_back("clip " + cid.value + ": trim_in must be >= 0");
        }
        if (const auto* text = c.text()) {
            if (auto why = check_style(text->style)) issues.push_back("clip " + cid.value + ": " + *why);
        }
    }

    for (const auto& [tid, t] : project.tracks) {
        auto on_track = project.clips_on_track(tid);
        for (std::size_t i = 1; i < on_track.size(); ++i) {
            if (on_track[i - 1]->end() > on_track[i]->start) {
                issues.push_back("clips " + on_track[i - 1]->id.value + " and " + on_track[i]->id.value + " overlap");
            }
        }
    }

    for (const auto& [aid, a] : project.animations) {
        note_id(aid, IdKind::Anim);
        if (project.clips.count(a.clip_id) == 0) {
            issues.push_back("animation " + aid.value + ": dangling clip " + a.clip_id.value);
        }
    }

    for (std::size_t i = 1; i < project.operation_log.size(); ++i) {
        if (project.operation_log[i].seq <= project.operation_log[i - 1].seq) {
            issues.push_back("operation log sequence not strictly increasing");
            break;
        }
    }
    return issues;
}

const OperationLogEntry& append_log(Project& project, Actor actor, std::string tool, json args, bool ok,
                                    std::string detail, std::int64_t timestamp_ms) {
    OperationLogEntry entry;
    entry.seq = project.operation_log.empty() ? 1 : project.operation_log.back().seq + 1;
    entry.timestamp_ms = timestamp_ms;
    entry.actor = actor;
    entry.tool = std::move(tool);
    entry.args = std::move(args);
    entry.ok = ok;
    entry.detail = std::move(detail);
    project.operation_log.push_back(std::move(entry));
    return project.operation_log.back();
}

}  // namespace tae
