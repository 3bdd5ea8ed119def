#include "tae/llm/context.hpp"

#include <algorithm>

#include "tae/core/serialize.hpp"
#include "tae/core/utf8.hpp"
#include "tae/script/script.hpp"

namespace tae {

namespace {

json clip_summary(const Project& project, const Clip& clip) {
    json out = {{"id", clip.id.value}, {"start", clip.start.seconds()}, {"duration", clip.duration.seconds()}};
    if (const auto* text = clip.text()) {
        out["type"] = "text";
        out["text"] = text->content;
        out["font_size"] = text->style.font_size;
    } else if (const auto* media = std::get_if<MediaPayload>(&clip.payload)) {
        out["type"] = "media";
        out["asset_ref"] = media->asset_ref.value;
    } else if (const auto* element = std::get_if<ElementPayload>(&clip.payload)) {
        out["type"] = "element";
        out["element_kind"] = element->element_kind;
    }
    json anims = json::array();
    for (const auto* a : project.animations_of(clip.id)) {
        anims.push_back({{"id", a->id.value}, {"preset", a->preset}, {"phase", kPhaseNames.name(a->phase)}});
    }
    out["animations"] = std::move(anims);
    return out;
}

}  // namespace

AgentContext build_context(const Project& project, json dialog) {
    AgentContext ctx;
    ctx.revision = project.revision;
    ctx.dialog = std::move(dialog);

    json tracks = json::array();
    std::vector<const Track*> ordered;
    for (const auto& [tid, t] : project.tracks) ordered.push_back(&t);
    std::sort(ordered.begin(), ordered.end(), [](const Track* a, const Track* b) { return a->order_index < b->order_index; });
    for (const Track* t : ordered) {
        json clips = json::array();
        for (const Clip* c : project.clips_on_track(t->id)) clips.push_back(clip_summary(project, *c));
        tracks.push_back({{"id", t->id.value},
                          {"kind", kTrackKindNames.name(t->kind)},
                          {"name", t->name},
                          {"order_index", t->order_index},
                          {"clips", std::move(clips)}});
    }
    ctx.timeline_elements = {{"canvas", {{"width_px", project.canvas.width_px}, {"height_px", project.canvas.height_px}}},
                             {"fps", project.fps},
                             {"span", project.span().seconds()},
                             {"tracks", std::move(tracks)}};

    ScriptDocument doc = project_script(project, visible_text_tracks(project));
    for (const auto& line : doc.lines) ctx.text_content.push_back({{"clip_id", line.clip_id.value}, {"text", line.text}});

    for (const auto& entry : project.operation_log) ctx.operation_log.push_back(log_entry_to_json(entry));

    for (const auto& [aid, a] : project.assets) {
        json item = {{"id", aid.value}, {"kind", kAssetKindNames.name(a.kind)}, {"name", a.name}};
        if (a.media_duration) item["media_duration"] = *a.media_duration;
        ctx.assets.push_back(std::move(item));
    }

    for (const auto& [id, x] : project.assets) ctx.live_ids.insert(id.value);
    for (const auto& [id, x] : project.tracks) ctx.live_ids.insert(id.value);
    for (const auto& [id, x] : project.clips) ctx.live_ids.insert(id.value);
    for (const auto& [id, x] : project.animations) ctx.live_ids.insert(id.value);
    return ctx;
}

std::string describe_object(const Project& project, const ObjectId& id) {
    if (auto it = project.clips.find(id); it != project.clips.end()) {
        const Clip& c = it->second;
        std::string track = project.tracks.count(c.track_id) ? project.track(c.track_id).name : c.track_id.value;
        if (const auto* text = c.text()) {
            std::string snippet = utf8::substr(text->content, 0, 40);
            return "clip '" + snippet + "' on " + track;
        }
        return "clip at " + std::to_string(c.start.seconds()).substr(0, 5) + "s on " + track;
    }
    if (auto it = project.tracks.find(id); it != project.tracks.end()) {
        return "track '" + it->second.name + "' (" + std::string(kTrackKindNames.name(it->second.kind)) + ")";
    }
    if (auto it = project.assets.find(id); it != project.assets.end()) {
        return "asset '" + it->second.name + "' (" + std::string(kAssetKindNames.name(it->second.kind)) + ")";
    }
    if (auto it = project.animations.find(id); it != project.animations.end()) {
        return "animation " + it->second.preset + " on " + it->second.clip_id.value;
    }
    return id.value;
}

}  // namespace tae
