#include "tae/timeline/timeline.hpp"

#include <algorithm>
#include <cmath>

#include "tae/core/utf8.hpp"
#include "tae/timeline/presets.hpp"

namespace tae {

namespace {

void check_timing(TimeMs start, TimeMs duration) {
    if (start.ms < 0) {
        throw Error(ErrorCode::OutOfRange, "clip start must be >= 0", {{"start", start.seconds()}});
    }
    if (duration.ms <= 0) {
        throw Error(ErrorCode::InvalidDuration, "clip duration must be > 0", {{"duration", duration.seconds()}});
    }
}

void check_free(const Project& project, const ObjectId& track, TimeMs start, TimeMs duration,
                const std::optional<ObjectId>& exclude) {
    if (auto hit = find_overlap(project, track, start, duration, exclude)) {
        throw Error(ErrorCode::Overlap, "placement overlaps clip " + hit->value,
                    {{"conflicting_clip", hit->value}, {"track_id", track.value}});
    }
}

void check_payload(const Project& project, const Track& track, const ClipPayload& payload) {
    if (!payload_compatible(track.kind, payload)) {
        throw Error(ErrorCode::PayloadMismatch,
                    "payload not allowed on " + std::string(kTrackKindNames.name(track.kind)) + " track",
                    {{"track_id", track.id.value}});
    }
    if (const auto* media = std::get_if<MediaPayload>(&payload)) {
        (void)project.asset(media->asset_ref);
        if (media->trim_in.ms < 0) throw Error(ErrorCode::OutOfRange, "trim_in must be >= 0");
    }
    if (const auto* text = std::get_if<TextPayload>(&payload)) {
        if (auto why = check_style(text->style)) throw Error(ErrorCode::RangeViolation, *why);
    }
}

Phase default_phase(const std::string& preset) {
    const PresetSpec* spec = find_preset(preset);
    return spec != nullptr ? spec->phase : Phase::Enter;
}

void check_preset(const MetaRegistry& registry, const std::string& preset) {
    if (!registry.contains(preset) || registry.get(preset).category != ClassCategory::AnimationEffect) {
        throw Error(ErrorCode::UnknownPreset, "unknown preset " + preset, {{"preset", preset}});
    }
}

}  // namespace

Asset add_asset(Project& project, AssetKind kind, std::string name, std::string uri,
                std::optional<double> media_duration) {
    bool timed = kind == AssetKind::Audio || kind == AssetKind::Video;
    if (timed && !(media_duration && *media_duration > 0.0 && std::isfinite(*media_duration))) {
        throw Error(ErrorCode::InvalidDuration, "audio and video assets need a media_duration > 0");
    }
    if (!timed) media_duration.reset();
    Asset asset{project.new_id(IdKind::Asset), kind, std::move(name), std::move(uri), media_duration};
    project.assets.emplace(asset.id, asset);
    project.commit();
    return asset;
}

void remove_asset(Project& project, const ObjectId& asset) {
    (void)project.asset(asset);
    for (const auto& [cid, c] : project.clips) {
        if (const auto* media = std::get_if<MediaPayload>(&c.payload); media && media->asset_ref == asset) {
            throw Error(ErrorCode::DanglingReference, "asset is used by clip " + cid.value,
                        {{"id", asset.value}, {"clip_id", cid.value}});
        }
    }
    project.assets.erase(asset);
    project.commit();
}

Track add_track(Project& project, TrackKind kind, std::string name, std::optional<std::int64_t> order_index,
                bool script_visible) {
    std::int64_t order = order_index.value_or(project.next_order_index());
    if (order < 0) throw Error(ErrorCode::OutOfRange, "order_index must be >= 0");
    for (const auto& [tid, t] : project.tracks) {
        if (t.order_index == order) {
            throw Error(ErrorCode::OrderConflict, "order_index already used by " + tid.value,
                        {{"order_index", order}, {"track_id", tid.value}});
        }
    }
    Track track{project.new_id(IdKind::Track), kind, std::move(name), order, script_visible};
    project.tracks.emplace(track.id, track);
    project.commit();
    return track;
}

void remove_track(Project& project, const ObjectId& track) {
    (void)project.track(track);
    for (auto it = project.clips.begin(); it != project.clips.end();) {
        if (it->second.track_id == track) {
            std::erase_if(project.animations, [&](const auto& kv) { return kv.second.clip_id == it->first; });
            it = project.clips.erase(it);
        } else {
            ++it;
        }
    }
    project.tracks.erase(track);
    project.commit();
}

std::optional<ObjectId> find_overlap(const Project& project, const ObjectId& track, TimeMs start, TimeMs duration,
                                     const std::optional<ObjectId>& exclude) {
    TimeMs end = start + duration;
    for (const Clip* c : project.clips_on_track(track)) {
        if (exclude && c->id == *exclude) continue;
        if (c->start < end && start < c->end()) return c->id;
    }
    return std::nullopt;
}

Clip add_clip(Project& project, const ObjectId& track_id, TimeMs start, TimeMs duration, ClipPayload payload) {
    const Track& track = project.track(track_id);
    check_payload(project, track, payload);
    check_timing(start, duration);
    check_free(project, track_id, start, duration, std::nullopt);

    Clip clip{project.new_id(IdKind::Clip), track_id, start, duration, std::move(payload)};
    project.clips.emplace(clip.id, clip);
    project.commit();
    return clip;
}

Clip put_clip(Project& project, Clip candidate) {
    const Track& track = project.track(candidate.track_id);
    check_payload(project, track, candidate.payload);
    check_timing(candidate.start, candidate.duration);
    check_free(project, candidate.track_id, candidate.start, candidate.duration, candidate.id);
    if (candidate.id.empty()) candidate.id = project.new_id(IdKind::Clip);
    project.clips[candidate.id] = candidate;
    project.commit();
    return candidate;
}

Clip move_clip(Project& project, const ObjectId& clip_id, const std::optional<ObjectId>& new_track, TimeMs new_start) {
    const Clip& clip = project.clip(clip_id);
    ObjectId target = new_track.value_or(clip.track_id);
    const Track& track = project.track(target);
    if (!payload_compatible(track.kind, clip.payload)) {
        throw Error(ErrorCode::PayloadMismatch, "clip payload not allowed on target track",
                    {{"track_id", target.value}});
    }
    check_timing(new_start, clip.duration);
    check_free(project, target, new_start, clip.duration, clip_id);

    Clip& mut = project.clip(clip_id);
    mut.track_id = target;
    mut.start = new_start;
    project.commit();
    return mut;
}

Clip resize_clip(Project& project, const ObjectId& clip_id, TimeMs new_start, TimeMs new_duration) {
    const Clip& clip = project.clip(clip_id);
    check_timing(new_start, new_duration);
    check_free(project, clip.track_id, new_start, new_duration, clip_id);

    Clip& mut = project.clip(clip_id);
    mut.start = new_start;
    mut.duration = new_duration;
    project.commit();
    return mut;
}

void remove_clip(Project& project, const ObjectId& clip_id) {
    (void)project.clip(clip_id);
    std::erase_if(project.animations, [&](const auto& kv) { return kv.second.clip_id == clip_id; });
    project.clips.erase(clip_id);
    project.commit();
}

Clip set_payload(Project& project, const ObjectId& clip_id, ClipPayload payload) {
    const Clip& clip = project.clip(clip_id);
    check_payload(project, project.track(clip.track_id), payload);
    Clip& mut = project.clip(clip_id);
    mut.payload = std::move(payload);
    project.commit();
    return mut;
}

Clip set_text(Project& project, const ObjectId& clip_id, std::string content) {
    const Clip& clip = project.clip(clip_id);
    const TextPayload* text = clip.text();
    if (text == nullptr) throw Error(ErrorCode::NotTextClip, "clip is not a text clip", {{"id", clip_id.value}});
    Clip& mut = project.clip(clip_id);
    mut.text()->content = std::move(content);
    project.commit();
    return mut;
}

Clip set_style(Project& project, const ObjectId& clip_id, const TextStyle& style) {
    const Clip& clip = project.clip(clip_id);
    if (!clip.is_text()) throw Error(ErrorCode::NotTextClip, "clip is not a text clip", {{"id", clip_id.value}});
    if (auto why = check_style(style)) throw Error(ErrorCode::RangeViolation, *why);
    Clip& mut = project.clip(clip_id);
    mut.text()->style = style;
    project.commit();
    return mut;
}

std::size_t nearest_char_boundary(double fraction, std::size_t length) {
    double exact = std::clamp(fraction, 0.0, 1.0) * static_cast<double>(length);
    // Round half up so an exact midpoint between boundaries lands on the later one.
    auto k = static_cast<std::size_t>(std::floor(exact + 0.5));
    return std::min(k, length);
}

std::pair<Clip, Clip> split_clip(Project& project, const ObjectId& clip_id, TimeMs at) {
    const Clip& clip = project.clip(clip_id);
    std::size_t offset = 0;
    if (const auto* text = clip.text()) {
        double fraction = static_cast<double>((at - clip.start).ms) / static_cast<double>(clip.duration.ms);
        offset = nearest_char_boundary(fraction, utf8::length(text->content));
    }
    return split_clip_with_offset(project, clip_id, at, offset);
}

std::pair<Clip, Clip> split_clip_with_offset(Project& project, const ObjectId& clip_id, TimeMs at,
                                             std::size_t char_offset) {
    const Clip& clip = project.clip(clip_id);
    if (!(clip.start < at && at < clip.end())) {
        throw Error(ErrorCode::OutOfRange, "split point must lie strictly inside the clip",
                    {{"id", clip_id.value}, {"at", at.seconds()}});
    }

    Clip first = clip;
    Clip second = clip;
    second.id = project.new_id(IdKind::Clip);
    first.duration = at - clip.start;
    second.start = at;
    second.duration = clip.end() - at;

    if (const auto* text = clip.text()) {
        std::size_t len = utf8::length(text->content);
        char_offset = std::min(char_offset, len);
        first.text()->content = utf8::substr(text->content, 0, char_offset);
        second.text()->content = utf8::substr(text->content, char_offset);
    } else if (auto* media = std::get_if<MediaPayload>(&second.payload)) {
        media->trim_in += first.duration;
    }

    project.clips[first.id] = first;
    project.clips.emplace(second.id, second);
    for (auto& [aid, anim] : project.animations) {
        if (anim.clip_id == clip_id && anim.phase == Phase::Exit) anim.clip_id = second.id;
    }
    project.commit();
    return {first, second};
}

Clip merge_clips(Project& project, const ObjectId& a, const ObjectId& b) {
    const Clip& ca = project.clip(a);
    const Clip& cb = project.clip(b);
    if (ca.track_id != cb.track_id) {
        throw Error(ErrorCode::TrackMismatch, "clips are on different tracks", {{"a", a.value}, {"b", b.value}});
    }
    if (a == b) throw Error(ErrorCode::NotAdjacent, "cannot merge a clip with itself", {{"a", a.value}});

    const Clip& earlier = ca.start < cb.start ? ca : cb;
    const Clip& later = ca.start < cb.start ? cb : ca;
    for (const Clip* c : project.clips_on_track(ca.track_id)) {
        if (c->id != earlier.id && c->id != later.id && earlier.start < c->start && c->start < later.start) {
            throw Error(ErrorCode::NotAdjacent, "clip " + c->id.value + " lies between the merged clips",
                        {{"a", a.value}, {"b", b.value}, {"between", c->id.value}});
        }
    }

    Clip merged = earlier;
    merged.duration = later.end() - earlier.start;
    if (auto* text = merged.text()) {
        if (const auto* other = later.text()) text->content += other->content;
    }
    ObjectId removed = later.id;

    std::vector<std::pair<std::string, Phase>> kept;
    for (const auto& [aid, anim] : project.animations) {
        if (anim.clip_id == merged.id) kept.emplace_back(anim.preset, anim.phase);
    }
    for (auto it = project.animations.begin(); it != project.animations.end();) {
        auto& anim = it->second;
        if (anim.clip_id == removed) {
            auto key = std::make_pair(anim.preset, anim.phase);
            if (std::find(kept.begin(), kept.end(), key) != kept.end()) {
                it = project.animations.erase(it);
                continue;
            }
            anim.clip_id = merged.id;
            kept.push_back(key);
        }
        ++it;
    }

    project.clips.erase(removed);
    project.clips[merged.id] = merged;
    project.commit();
    return merged;
}

AnimationInstance attach_animation(Project& project, const MetaRegistry& registry, const ObjectId& clip,
                                   const std::string& preset, const json& params, std::optional<Phase> phase) {
    (void)project.clip(clip);
    check_preset(registry, preset);
    json resolved = registry.resolve_fields(preset, params);

    AnimationInstance anim{project.new_id(IdKind::Anim), clip, preset, std::move(resolved),
                           phase.value_or(default_phase(preset))};
    project.animations.emplace(anim.id, anim);
    project.commit();
    return anim;
}

AnimationInstance update_animation(Project& project, const MetaRegistry& registry, const ObjectId& anim_id,
                                   const json& params, std::optional<Phase> phase) {
    const AnimationInstance& anim = project.animation(anim_id);
    registry.check_partial(anim.preset, params);
    AnimationInstance updated = anim;
    for (const auto& [key, value] : params.items()) updated.params[key] = value;
    if (phase) updated.phase = *phase;
    project.animations[anim_id] = updated;
    project.commit();
    return updated;
}

void detach_animation(Project& project, const ObjectId& anim) {
    (void)project.animation(anim);
    project.animations.erase(anim);
    project.commit();
}

}  // namespace tae
