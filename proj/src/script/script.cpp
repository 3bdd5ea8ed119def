#include "tae/script/script.hpp"

#include <algorithm>
#include <tuple>

#include "tae/core/serialize.hpp"
#include "tae/core/utf8.hpp"
#include "tae/timeline/timeline.hpp"

namespace tae {

namespace {

const Track& text_track(const Project& project, const ObjectId& id) {
    const Track& track = project.track(id);
    if (track.kind != TrackKind::Text) {
        throw Error(ErrorCode::NonTextTrack, "track " + id.value + " is not a text track", {{"track_id", id.value}});
    }
    return track;
}

std::vector<ObjectId> sorted_unique(std::vector<ObjectId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

}  // namespace

ScriptDocument project_script(const Project& project, const std::vector<ObjectId>& selected_tracks) {
    ScriptDocument doc;
    doc.revision = project.revision;
    doc.selected_tracks = sorted_unique(selected_tracks);

    std::vector<std::tuple<TimeMs, std::int64_t, ObjectId>> keys;
    for (const ObjectId& tid : doc.selected_tracks) {
        const Track& track = text_track(project, tid);
        for (const Clip* c : project.clips_on_track(tid)) keys.emplace_back(c->start, track.order_index, c->id);
    }
    std::sort(keys.begin(), keys.end());
    for (const auto& [start, order, cid] : keys) {
        const Clip& c = project.clip(cid);
        doc.lines.push_back(ScriptLine{cid, c.text()->content, c.text()->style, {}});
    }
    return doc;
}

std::vector<ObjectId> visible_text_tracks(const Project& project) {
    std::vector<ObjectId> out;
    for (const auto& [tid, t] : project.tracks) {
        if (t.kind == TrackKind::Text && t.script_visible) out.push_back(tid);
    }
    return out;
}

json script_to_json(const ScriptDocument& doc) {
    json tracks = json::array();
    for (const auto& t : doc.selected_tracks) tracks.push_back(t.value);
    json lines = json::array();
    for (const auto& line : doc.lines) {
        json markers = json::array();
        for (const auto& m : line.suggestion_markers) markers.push_back(m.value);
        lines.push_back({{"clip_id", line.clip_id.value},
                         {"text", line.text},
                         {"style", style_to_json(line.style)},
                         {"markers", std::move(markers)}});
    }
    return {{"revision", doc.revision}, {"selected_tracks", std::move(tracks)}, {"lines", std::move(lines)}};
}

std::optional<ScriptLine> anchor_line(const ScriptDocument& doc, const LineAnchor& anchor) {
    if (anchor.position == AnchorPosition::End) {
        if (doc.lines.empty()) return std::nullopt;
        return doc.lines.back();
    }
    if (anchor.line_index >= doc.lines.size()) {
        throw Error(ErrorCode::InvalidAnchor, "anchor line index out of range",
                    {{"line_index", anchor.line_index}, {"lines", doc.lines.size()}});
    }
    return doc.lines[anchor.line_index];
}

PlacementDecision resolve_placement(const Project& project, const ScriptDocument& doc, const LineAnchor& anchor,
                                    PlacementStrategy strategy, const std::optional<ObjectId>& preferred_track) {
    auto line = anchor_line(doc, anchor);
    if (!line) {
        if (strategy == PlacementStrategy::SequentialSameTrack && !doc.selected_tracks.empty()) {
            const ObjectId& tid = doc.selected_tracks.front();
            (void)text_track(project, tid);
            auto clips = project.clips_on_track(tid);
            return {strategy, tid, clips.empty() ? TimeMs{0} : clips.back()->end()};
        }
        return {PlacementStrategy::ParallelNewTrack, ObjectId{}, TimeMs{0}};
    }

    const Clip& anchor_clip = project.clip(line->clip_id);
    switch (strategy) {
        case PlacementStrategy::SequentialSameTrack: {
            TimeMs start = anchor.position == AnchorPosition::Before ? anchor_clip.start : anchor_clip.end();
            return {strategy, anchor_clip.track_id, start};
        }
        case PlacementStrategy::ParallelAdjustedTiming: {
            if (preferred_track) {
                (void)text_track(project, *preferred_track);
                if (*preferred_track == anchor_clip.track_id) {
                    throw Error(ErrorCode::InvalidAnchor, "parallel placement needs a track other than the anchor's",
                                {{"track_id", preferred_track->value}});
                }
                return {strategy, *preferred_track, anchor_clip.start};
            }
            // Nearest other visible text track, preferring the one stacked just above.
            std::int64_t anchor_order = project.track(anchor_clip.track_id).order_index;
            std::optional<ObjectId> best;
            std::int64_t best_distance = 0;
            for (const ObjectId& tid : doc.selected_tracks) {
                if (tid == anchor_clip.track_id) continue;
                std::int64_t order = project.track(tid).order_index;
                std::int64_t distance = order > anchor_order ? 2 * (order - anchor_order) - 1 : 2 * (anchor_order - order);
                if (!best || distance < best_distance) {
                    best = tid;
                    best_distance = distance;
                }
            }
            if (best) return {strategy, *best, anchor_clip.start};
            return {PlacementStrategy::ParallelNewTrack, ObjectId{}, anchor_clip.start};
        }
        case PlacementStrategy::ParallelNewTrack: return {strategy, ObjectId{}, anchor_clip.start};
    }
    return {strategy, anchor_clip.track_id, anchor_clip.end()};
}

void apply_text_edit(Project& project, const ObjectId& clip, std::string text) {
    (void)set_text(project, clip, std::move(text));
}

TimeMs proportional_first_duration(TimeMs duration, std::size_t first_chars, std::size_t total_chars) {
    auto n = static_cast<std::int64_t>(total_chars);
    auto n1 = static_cast<std::int64_t>(first_chars);
    // round(duration * n1 / n) with halves rounded up, in exact integer arithmetic.
    return TimeMs((2 * duration.ms * n1 + n) / (2 * n));
}

std::pair<Clip, Clip> split_line(Project& project, const ObjectId& clip_id, std::size_t char_offset) {
    const Clip& clip = project.clip(clip_id);
    const TextPayload* text = clip.text();
    if (text == nullptr) throw Error(ErrorCode::NotTextClip, "clip is not a text clip", {{"id", clip_id.value}});
    std::size_t len = utf8::length(text->content);
    if (char_offset == 0 || char_offset >= len) {
        throw Error(ErrorCode::OffsetOutOfRange, "split offset must lie strictly inside the text",
                    {{"offset", char_offset}, {"length", len}});
    }
    TimeMs first = proportional_first_duration(clip.duration, char_offset, len);
    if (first.ms <= 0 || first >= clip.duration) {
        throw Error(ErrorCode::InvalidDuration, "clip too short to split at this offset",
                    {{"duration", clip.duration.seconds()}, {"offset", char_offset}});
    }
    return split_clip_with_offset(project, clip_id, clip.start + first, char_offset);
}

Clip merge_lines(Project& project, const ObjectId& a, const ObjectId& b) {
    for (const ObjectId& id : {a, b}) {
        if (!project.clip(id).is_text()) {
            throw Error(ErrorCode::NotTextClip, "clip is not a text clip", {{"id", id.value}});
        }
    }
    return merge_clips(project, a, b);
}

AddLineResult add_line(Project& project, const ScriptDocument& doc, const LineAnchor& anchor, std::string text,
                       const PlacementDecision& placement, TimeMs duration) {
    auto line = anchor_line(doc, anchor);
    if (placement.start.ms < 0) throw Error(ErrorCode::OutOfRange, "placement start must be >= 0");
    if (duration.ms <= 0) throw Error(ErrorCode::InvalidDuration, "line duration must be > 0");

    AddLineResult result;
    result.placement = placement;

    // Validate everything before touching the project.
    std::vector<const Clip*> on_track;
    if (!placement.track_id.empty()) {
        (void)text_track(project, placement.track_id);
        on_track = project.clips_on_track(placement.track_id);
    }

    TimeMs start = placement.start;
    TimeMs end = start + duration;
    bool occupied = std::any_of(on_track.begin(), on_track.end(),
                                [&](const Clip* c) { return c->start < end && start < c->end(); });
    TimeMs shift{0};
    std::vector<ObjectId> to_shift;
    if (occupied) {
        // A clip straddling the insertion point moves to the new clip's end;
        // everything from it onward keeps its relative layout.
        shift = duration;
        for (const Clip* c : on_track) {
            if (c->start < start && start < c->end()) shift = end - c->start;
        }
        for (const Clip* c : on_track) {
            if (c->end() > start) to_shift.push_back(c->id);
        }
    }

    TextStyle style = line ? line->style : TextStyle{};

    ObjectId track_id = placement.track_id;
    if (track_id.empty()) {
        std::int64_t order = project.next_order_index();
        Track track{project.new_id(IdKind::Track), TrackKind::Text, "Text " + std::to_string(order + 1), order, true};
        project.tracks.emplace(track.id, track);
        result.created_track = track;
        track_id = track.id;
    }
    for (const ObjectId& id : to_shift) project.clips.at(id).start += shift;

    Clip clip{project.new_id(IdKind::Clip), track_id, start, duration, TextPayload{std::move(text), style}};
    project.clips.emplace(clip.id, clip);
    project.commit();

    result.clip = clip;
    result.placement.track_id = track_id;
    result.shifted = std::move(to_shift);
    result.shift = shift;
    return result;
}

std::size_t apply_style_batch(Project& project, const ScriptDocument& doc, std::size_t begin, std::size_t count,
                              const TextStyleDelta& delta) {
    if (count == 0) throw Error(ErrorCode::EmptyRange, "style batch needs at least one line");
    if (begin + count > doc.lines.size()) {
        throw Error(ErrorCode::OutOfRange, "line range beyond the script",
                    {{"begin", begin}, {"count", count}, {"lines", doc.lines.size()}});
    }
    std::vector<std::pair<ObjectId, TextStyle>> updates;
    for (std::size_t i = begin; i < begin + count; ++i) {
        const Clip& clip = project.clip(doc.lines[i].clip_id);
        if (!clip.is_text()) throw Error(ErrorCode::NotTextClip, "clip is not a text clip", {{"id", clip.id.value}});
        TextStyle style = clip.text()->style;
        delta.apply_to(style);
        if (auto why = check_style(style)) throw Error(ErrorCode::RangeViolation, *why);
        updates.emplace_back(clip.id, style);
    }
    for (const auto& [id, style] : updates) (void)set_style(project, id, style);
    return updates.size();
}

ScriptDocument set_script_tracks(Project& project, const std::vector<ObjectId>& track_ids) {
    for (const ObjectId& id : track_ids) (void)text_track(project, id);
    auto wanted = sorted_unique(track_ids);
    bool changed = false;
    for (auto& [tid, t] : project.tracks) {
        if (t.kind != TrackKind::Text) continue;
        bool visible = std::binary_search(wanted.begin(), wanted.end(), tid);
        if (t.script_visible != visible) {
            t.script_visible = visible;
            changed = true;
        }
    }
    if (changed) project.commit();
    return project_script(project, wanted);
}

// ---------------------------------------------------------------------------

ScriptEditor::ScriptEditor(Project& project) : project_(project) {
    doc_ = project_script(project_, visible_text_tracks(project_));
    for (const auto& line : doc_.lines) remember(project_.clip(line.clip_id));
}

std::size_t ScriptEditor::index_of(const ObjectId& clip) const {
    for (std::size_t i = 0; i < doc_.lines.size(); ++i) {
        if (doc_.lines[i].clip_id == clip) return i;
    }
    return doc_.lines.size();
}

void ScriptEditor::remember(const Clip& clip) {
    keys_[clip.id] = LineKey{clip.start, project_.track(clip.track_id).order_index};
}

bool ScriptEditor::selected(const ObjectId& track) const {
    return std::binary_search(doc_.selected_tracks.begin(), doc_.selected_tracks.end(), track);
}

void ScriptEditor::sort_lines() {
    std::stable_sort(doc_.lines.begin(), doc_.lines.end(), [this](const ScriptLine& a, const ScriptLine& b) {
        const LineKey& ka = keys_.at(a.clip_id);
        const LineKey& kb = keys_.at(b.clip_id);
        return std::tie(ka.start, ka.track_order, a.clip_id) < std::tie(kb.start, kb.track_order, b.clip_id);
    });
}

void ScriptEditor::apply_text_edit(const ObjectId& clip_ref, std::string text) {
    ObjectId clip = clip_ref;
    tae::apply_text_edit(project_, clip, text);
    if (auto i = index_of(clip); i < doc_.lines.size()) doc_.lines[i].text = std::move(text);
    doc_.revision = project_.revision;
}

std::pair<Clip, Clip> ScriptEditor::split_line(const ObjectId& clip_ref, std::size_t char_offset) {
    ObjectId clip = clip_ref;
    auto parts = tae::split_line(project_, clip, char_offset);
    if (auto i = index_of(clip); i < doc_.lines.size()) {
        doc_.lines[i].text = parts.first.text()->content;
        doc_.lines.insert(doc_.lines.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                          ScriptLine{parts.second.id, parts.second.text()->content, parts.second.text()->style, {}});
        remember(parts.second);
        sort_lines();
    }
    doc_.revision = project_.revision;
    return parts;
}

Clip ScriptEditor::merge_lines(const ObjectId& a, const ObjectId& b) {
    // Copies: the arguments may alias lines of doc_, which is edited below.
    ObjectId first = a;
    ObjectId second = b;
    Clip merged = tae::merge_lines(project_, first, second);
    ObjectId removed = merged.id == first ? second : first;
    if (auto i = index_of(removed); i < doc_.lines.size()) {
        doc_.lines.erase(doc_.lines.begin() + static_cast<std::ptrdiff_t>(i));
        keys_.erase(removed);
    }
    if (auto i = index_of(merged.id); i < doc_.lines.size()) doc_.lines[i].text = merged.text()->content;
    doc_.revision = project_.revision;
    return merged;
}

AddLineResult ScriptEditor::add_line(const LineAnchor& anchor, std::string text, const PlacementDecision& placement) {
    AddLineResult result = tae::add_line(project_, doc_, anchor, std::move(text), placement);
    if (result.created_track) {
        auto& tracks = doc_.selected_tracks;
        tracks.insert(std::upper_bound(tracks.begin(), tracks.end(), result.created_track->id),
                      result.created_track->id);
    }
    for (const ObjectId& id : result.shifted) {
        if (keys_.count(id) > 0) remember(project_.clip(id));
    }
    if (selected(result.clip.track_id)) {
        const TextPayload* payload = result.clip.text();
        doc_.lines.push_back(ScriptLine{result.clip.id, payload->content, payload->style, {}});
        remember(result.clip);
    }
    sort_lines();
    doc_.revision = project_.revision;
    return result;
}

std::size_t ScriptEditor::apply_style_batch(std::size_t begin, std::size_t count, const TextStyleDelta& delta) {
    std::size_t updated = tae::apply_style_batch(project_, doc_, begin, count, delta);
    for (std::size_t i = begin; i < begin + count; ++i) delta.apply_to(doc_.lines[i].style);
    doc_.revision = project_.revision;
    return updated;
}

const ScriptDocument& ScriptEditor::set_tracks(const std::vector<ObjectId>& track_ids) {
    doc_ = set_script_tracks(project_, track_ids);
    keys_.clear();
    for (const auto& line : doc_.lines) remember(project_.clip(line.clip_id));
    return doc_;
}

}  // namespace tae
