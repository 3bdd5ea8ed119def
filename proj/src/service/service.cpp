#include "tae/service/service.hpp"

#include <unistd.h>

#include <cmath>
#include <random>

#include "tae/script/script.hpp"
#include "tae/timeline/evaluate.hpp"
#include "tae/timeline/presets.hpp"
#include "tae/timeline/timeline.hpp"

namespace tae {

namespace fs = std::filesystem;

ProviderResponse OfflineProvider::complete(const ProviderRequest&, const json&) {
    throw provider_error(ProviderFailure::Network, "offline mode: no language model is configured");
}

namespace {

Error bad_request(const std::string& message, json detail = json::object()) {
    return Error(ErrorCode::BadRequest, message, std::move(detail));
}

std::uint64_t id_seed(const ObjectId& id, std::uint64_t salt) { return std::hash<std::string>{}(id.value) ^ salt; }

LineAnchor parse_anchor(const json& doc) {
    if (!doc.is_object()) throw bad_request("anchor must be an object");
    LineAnchor anchor;
    std::string pos = doc.value("position", std::string("end"));
    if (pos == "before") {
        anchor.position = AnchorPosition::Before;
    } else if (pos == "after") {
        anchor.position = AnchorPosition::After;
    } else if (pos == "end") {
        anchor.position = AnchorPosition::End;
    } else {
        throw bad_request("anchor position must be before, after or end", {{"position", pos}});
    }
    if (anchor.position != AnchorPosition::End) {
        const json& idx = doc.contains("line_index") ? doc["line_index"] : json();
        if (!idx.is_number_integer() || idx.get<std::int64_t>() < 0) throw bad_request("anchor needs a line_index >= 0");
        anchor.line_index = idx.get<std::size_t>();
    }
    return anchor;
}

std::vector<ObjectId> id_list(const json& doc, const char* what) {
    if (!doc.is_array()) throw bad_request(std::string(what) + " must be an array of ids");
    std::vector<ObjectId> out;
    for (const auto& v : doc) {
        if (!v.is_string()) throw bad_request(std::string(what) + " must be an array of ids");
        out.emplace_back(v.get<std::string>());
    }
    return out;
}

json placement_to_json(const PlacementDecision& d) {
    return {{"strategy", kPlacementStrategyNames.name(d.strategy)},
            {"track_id", d.track_id.empty() ? json(nullptr) : json(d.track_id.value)},
            {"start", d.start.seconds()}};
}

}  // namespace

EditorService::EditorService(ServiceConfig config)
    : config_(std::move(config)),
      registry_(make_builtin_registry()),
      dispatcher_(registry_, config_.clock),
      store_(config_.data_dir),
      gateway_(config_.gateway ? config_.gateway : std::make_shared<Gateway>(std::make_shared<OfflineProvider>())),
      agents_(config_.agent_mode, gateway_) {
    worker_ = std::thread([this] { worker(); });
}

EditorService::~EditorService() {
    {
        std::lock_guard lock(work_mutex_);
        stopping_ = true;
    }
    work_cv_.notify_all();
    if (worker_.joinable()) worker_.join();
    hub_.close_all();
}

std::int64_t EditorService::now() const {
    if (config_.clock) return config_.clock();
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------------------
// handles

std::shared_ptr<EditorService::Handle> EditorService::adopt(StoredProject stored) {
    ObjectId id = stored.project.id;
    auto h = std::make_shared<Handle>(std::move(stored.project), id_seed(id, 0x5e6e57ULL));
    Handle* raw = h.get();
    h->id = id;
    h->chat = std::make_unique<ChatOrchestrator>(h->cell, dispatcher_, gateway_, id_seed(h->id, 0xc4a7ULL));
    h->chat->restore(stored.sessions);
    h->chat->set_event_sink([this, raw](const ObjectId& sid, const ChatEvent& ev) {
        hub_.publish(raw->id, "chat", {{"session_id", sid.value}, {"event", event_to_json(ev)}});
        if (ev.type == "step_result") settle(*raw);
    });
    h->cell.read([&](const Project& p) {
        h->seen_clips = p.clips;
        h->announced_revision = p.revision;
    });
    handles_[h->id] = h;
    return h;
}

std::shared_ptr<EditorService::Handle> EditorService::handle(const ObjectId& project) {
    std::lock_guard lock(handles_mutex_);
    auto it = handles_.find(project);
    if (it != handles_.end()) return it->second;
    if (!store_.exists(project)) throw Error(ErrorCode::UnknownProject, "no such project", {{"project_id", project.value}});
    return adopt(store_.load(project, &registry_));
}

void EditorService::require_project(const ObjectId& project) { handle(project); }

template <class Fn>
json EditorService::edit(Handle& h, const std::string& tool, const json& args, Fn&& fn, bool log) {
    json result;
    std::optional<Error> failure;
    h.cell.mutate([&](Project& p) {
        try {
            result = fn(p);
            if (log) append_log(p, Actor::User, tool, args, true, "", now());
        } catch (const Error& e) {
            failure = e;
            if (log) append_log(p, Actor::User, tool, args, false, e.what(), now());
        }
    });
    settle(h);
    if (failure) throw *failure;
    return result;
}

void EditorService::settle(Handle& h) {
    std::set<ObjectId> changed;
    {
        std::lock_guard lock(h.settle_mutex);
        auto snap = h.cell.snapshot();
        for (const auto& [id, c] : snap->clips) {
            if (!c.is_text()) continue;
            auto it = h.seen_clips.find(id);
            if (it == h.seen_clips.end() || !(it->second == c)) changed.insert(id);
        }
        h.seen_clips = snap->clips;
        store_.save(*snap, h.chat->sessions());
        if (snap->revision != h.announced_revision) {
            h.announced_revision = snap->revision;
            hub_.publish(h.id, "revision", {{"revision", snap->revision}});
        }
        for (const auto& sid : h.book.invalidate_stale(*snap)) {
            hub_.publish(h.id, "suggestion_dismissed",
                         {{"suggestion_id", sid.value}, {"reason", "stale"}, {"project_revision", snap->revision}});
        }
    }
    if (changed.empty()) return;
    {
        std::lock_guard lock(work_mutex_);
        h.dirty.insert(changed.begin(), changed.end());
        h.due = std::chrono::steady_clock::now() + config_.debounce;
        scheduled_[h.id] = h.shared_from_this();
    }
    work_cv_.notify_all();
}

void EditorService::recompute(Handle& h, const std::set<ObjectId>& clips) {
    std::lock_guard lock(h.recompute_mutex);
    auto snap = h.cell.snapshot();
    auto announce = [&](const Suggestion& s) {
        Suggestion stored = h.book.add(s);
        hub_.publish(h.id, "suggestion", {{"suggestion", suggestion_to_json(stored)}, {"project_revision", snap->revision}});
    };
    auto retire = [&](const std::vector<ObjectId>& ids) {
        for (const auto& sid : ids) {
            hub_.publish(h.id, "suggestion_dismissed",
                         {{"suggestion_id", sid.value}, {"reason", "superseded"}, {"project_revision", snap->revision}});
        }
    };
    for (const auto& clip : clips) {
        auto it = snap->clips.find(clip);
        if (it == snap->clips.end() || !it->second.is_text()) continue;
        retire(h.book.clear_pending(clip, SuggestionKind::TextRevision));
        try {
            for (const auto& s : agents_.suggest_text_revisions(*snap, clip)) announce(s);
        } catch (const Error&) {
            // A failed agent call just leaves the line without a marker.
        }
        retire(h.book.clear_pending(clip, SuggestionKind::AnimationRecommendation));
        if (!snap->animations_of(clip).empty()) continue;
        try {
            announce(agents_.recommend_animation(*snap, clip));
        } catch (const Error&) {
        }
    }
}

void EditorService::worker() {
    std::unique_lock lock(work_mutex_);
    while (!stopping_) {
        if (scheduled_.empty()) {
            work_cv_.wait(lock);
            continue;
        }
        auto now_tp = std::chrono::steady_clock::now();
        auto earliest = std::chrono::steady_clock::time_point::max();
        std::vector<std::pair<std::shared_ptr<Handle>, std::set<ObjectId>>> due;
        for (auto it = scheduled_.begin(); it != scheduled_.end();) {
            Handle& h = *it->second;
            if (h.due <= now_tp) {
                due.emplace_back(it->second, std::move(h.dirty));
                h.dirty.clear();
                it = scheduled_.erase(it);
            } else {
                earliest = std::min(earliest, h.due);
                ++it;
            }
        }
        if (due.empty()) {
            work_cv_.wait_until(lock, earliest);
            continue;
        }
        lock.unlock();
        for (auto& [h, clips] : due) recompute(*h, clips);
        lock.lock();
    }
}

void EditorService::flush_suggestions() {
    std::vector<std::pair<std::shared_ptr<Handle>, std::set<ObjectId>>> work;
    {
        std::lock_guard lock(work_mutex_);
        for (auto& [id, h] : scheduled_) {
            work.emplace_back(h, std::move(h->dirty));
            h->dirty.clear();
        }
        scheduled_.clear();
    }
    for (auto& [h, clips] : work) recompute(*h, clips);
}

// ---------------------------------------------------------------------------
// projects

json EditorService::create_project(const json& options) {
    if (!options.is_object()) throw bad_request("project options must be an object");
    Canvas canvas;
    double fps = options.value("fps", 30.0);
    if (options.contains("canvas")) {
        const json& c = options["canvas"];
        if (!c.is_object()) throw bad_request("canvas must be an object");
        canvas.width_px = c.value("width_px", canvas.width_px);
        canvas.height_px = c.value("height_px", canvas.height_px);
    }
    if (canvas.width_px <= 0 || canvas.height_px <= 0) throw bad_request("canvas size must be positive");
    if (!std::isfinite(fps) || fps <= 0) throw bad_request("fps must be positive");

    std::uint64_t seed = 0;
    if (options.contains("seed")) {
        if (!options["seed"].is_number_integer()) throw bad_request("seed must be an integer");
        seed = options["seed"].get<std::uint64_t>();
    } else {
        seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
    }

    std::lock_guard lock(handles_mutex_);
    Project p = make_project(seed, canvas, fps);
    while (store_.exists(p.id) || handles_.count(p.id)) p = make_project(++seed, canvas, fps);
    store_.save(p);
    auto h = adopt(StoredProject{std::move(p), {}});
    return serialize_project(*h->cell.snapshot());
}

json EditorService::list_projects() {
    json out = json::array();
    for (const auto& id : store_.list()) {
        try {
            auto snap = snapshot(id);
            out.push_back({{"id", id.value},
                           {"revision", snap->revision},
                           {"tracks", snap->tracks.size()},
                           {"clips", snap->clips.size()},
                           {"span", snap->span().seconds()}});
        } catch (const Error& e) {
            out.push_back({{"id", id.value}, {"error", e.to_json()}});
        }
    }
    return out;
}

std::shared_ptr<const Project> EditorService::snapshot(const ObjectId& project) { return handle(project)->cell.snapshot(); }

json EditorService::document(const ObjectId& project) { return serialize_project(*snapshot(project)); }

json EditorService::replace_document(const ObjectId& project, const json& doc) {
    auto h = handle(project);
    Project incoming = deserialize_project(doc, &registry_);
    if (incoming.id != project) {
        throw bad_request("document belongs to another project", {{"project_id", project.value}, {"found", incoming.id.value}});
    }
    edit(*h, "replace_document", {{"revision", incoming.revision}}, [&](Project& p) {
        incoming.operation_log = std::move(p.operation_log);
        incoming.revision = std::max(incoming.revision, p.revision + 1);
        p = std::move(incoming);
        return json();
    });
    return document(project);
}

void EditorService::delete_project(const ObjectId& project) {
    std::shared_ptr<Handle> h = handle(project);
    {
        std::lock_guard lock(work_mutex_);
        scheduled_.erase(project);
    }
    {
        std::lock_guard lock(h->settle_mutex);
        std::lock_guard handles_lock(handles_mutex_);
        handles_.erase(project);
        store_.remove(project);
    }
    hub_.close_project(project);
}

// ---------------------------------------------------------------------------
// timeline

json EditorService::call_tool(const ObjectId& project, const std::string& tool, const json& args, Actor actor) {
    auto h = handle(project);
    return edit(
        *h, tool, args, [&](Project& p) { return dispatcher_.dispatch(p, tool, args, actor); }, false);
}

json EditorService::create_track(const ObjectId& project, const json& body) {
    return call_tool(project, "create_track", body);
}

void EditorService::delete_track(const ObjectId& project, const ObjectId& track) {
    call_tool(project, "delete_track", {{"id", track.value}});
}

json EditorService::split_clip(const ObjectId& project, const ObjectId& clip, double at_seconds) {
    if (!std::isfinite(at_seconds)) throw bad_request("split time must be a number");
    auto h = handle(project);
    return edit(*h, "split_clip", {{"clip_id", clip.value}, {"at", at_seconds}}, [&](Project& p) {
        auto [a, b] = tae::split_clip(p, clip, TimeMs::from_seconds(at_seconds));
        return json{{"first", clip_to_json(a)}, {"second", clip_to_json(b)}};
    });
}

json EditorService::merge_clips(const ObjectId& project, const ObjectId& a, const ObjectId& b) {
    auto h = handle(project);
    return edit(*h, "merge_clips", {{"a", a.value}, {"b", b.value}},
                [&](Project& p) { return clip_to_json(tae::merge_clips(p, a, b)); });
}

json EditorService::frame(const ObjectId& project, double t) {
    if (!std::isfinite(t) || t < 0) throw bad_request("t must be a non-negative number of seconds", {{"t", t}});
    auto snap = snapshot(project);
    return frame_to_json(t, snapshot_frame(*snap, t));
}

// ---------------------------------------------------------------------------
// script

json EditorService::script(const ObjectId& project, const std::optional<std::vector<ObjectId>>& tracks) {
    auto h = handle(project);
    auto snap = h->cell.snapshot();
    ScriptDocument doc = project_script(*snap, tracks ? *tracks : visible_text_tracks(*snap));
    h->book.attach_markers(doc);
    return script_to_json(doc);
}

json EditorService::script_edit(const ObjectId& project, const ObjectId& clip, const std::string& text) {
    auto h = handle(project);
    return edit(*h, "script_edit", {{"clip_id", clip.value}, {"text", text}}, [&](Project& p) {
        apply_text_edit(p, clip, text);
        return clip_to_json(p.clip(clip));
    });
}

json EditorService::script_split(const ObjectId& project, const ObjectId& clip, std::size_t offset) {
    auto h = handle(project);
    return edit(*h, "script_split", {{"clip_id", clip.value}, {"offset", offset}}, [&](Project& p) {
        auto [a, b] = split_line(p, clip, offset);
        return json{{"first", clip_to_json(a)}, {"second", clip_to_json(b)}};
    });
}

json EditorService::script_merge(const ObjectId& project, const ObjectId& a, const ObjectId& b) {
    auto h = handle(project);
    return edit(*h, "script_merge", {{"a", a.value}, {"b", b.value}},
                [&](Project& p) { return clip_to_json(merge_lines(p, a, b)); });
}

json EditorService::script_add_line(const ObjectId& project, const json& body) {
    if (!body.is_object()) throw bad_request("body must be an object");
    auto h = handle(project);
    LineAnchor anchor = parse_anchor(body.value("anchor", json::object()));
    if (!body.contains("text") || !body["text"].is_string()) throw bad_request("text is required");
    std::string text = body["text"].get<std::string>();
    std::optional<std::vector<ObjectId>> tracks;
    if (body.contains("tracks")) tracks = id_list(body["tracks"], "tracks");
    std::optional<ObjectId> preferred;
    if (body.contains("preferred_track")) {
        if (!body["preferred_track"].is_string()) throw bad_request("preferred_track must be an id");
        preferred = ObjectId(body["preferred_track"].get<std::string>());
    }

    std::optional<PlacementProposal> proposal;
    PlacementStrategy strategy = PlacementStrategy::SequentialSameTrack;
    if (body.contains("strategy") && !body["strategy"].is_null()) {
        auto parsed = body["strategy"].is_string() ? kPlacementStrategyNames.parse(body["strategy"].get<std::string>())
                                                   : std::nullopt;
        if (!parsed) throw bad_request("unknown placement strategy", {{"strategy", body["strategy"]}});
        strategy = *parsed;
    } else {
        proposal = agents_.propose_clip_placement(*h->cell.snapshot(), text, anchor);
        strategy = proposal->decision.strategy;
    }

    return edit(*h, "add_line", body, [&](Project& p) {
        ScriptDocument doc = project_script(p, tracks ? *tracks : visible_text_tracks(p));
        PlacementDecision decision = resolve_placement(p, doc, anchor, strategy, preferred);
        if (proposal && proposal->fell_back) log_placement_fallback(p, *proposal, now());
        AddLineResult r = add_line(p, doc, anchor, text, decision);
        json shifted = json::array();
        for (const auto& id : r.shifted) shifted.push_back(id.value);
        json out = {{"clip", clip_to_json(r.clip)},
                    {"placement", placement_to_json(r.placement)},
                    {"created_track", r.created_track ? track_to_json(*r.created_track) : json(nullptr)},
                    {"shifted", shifted},
                    {"shift", r.shift.seconds()},
                    {"decided_by", proposal ? "agent" : "user"}};
        if (proposal) {
            out["reason"] = proposal->reason;
            out["fell_back"] = proposal->fell_back;
        }
        return out;
    });
}

json EditorService::script_style(const ObjectId& project, const json& body) {
    if (!body.is_object()) throw bad_request("body must be an object");
    auto h = handle(project);
    const json& begin = body.contains("begin") ? body["begin"] : json();
    const json& count = body.contains("count") ? body["count"] : json();
    if (!begin.is_number_integer() || begin.get<std::int64_t>() < 0 || !count.is_number_integer() ||
        count.get<std::int64_t>() < 0) {
        throw bad_request("begin and count must be non-negative integers");
    }
    TextStyleDelta delta = style_delta_from_json(body.value("style", json::object()));
    std::optional<std::vector<ObjectId>> tracks;
    if (body.contains("tracks")) tracks = id_list(body["tracks"], "tracks");
    return edit(*h, "style_batch", body, [&](Project& p) {
        ScriptDocument doc = project_script(p, tracks ? *tracks : visible_text_tracks(p));
        std::size_t n = apply_style_batch(p, doc, begin.get<std::size_t>(), count.get<std::size_t>(), delta);
        return json{{"updated", n}};
    });
}

json EditorService::script_set_tracks(const ObjectId& project, const std::vector<ObjectId>& tracks) {
    auto h = handle(project);
    json ids = json::array();
    for (const auto& t : tracks) ids.push_back(t.value);
    edit(*h, "set_script_tracks", {{"track_ids", ids}}, [&](Project& p) {
        set_script_tracks(p, tracks);
        return json();
    });
    return script(project, tracks);
}

// ---------------------------------------------------------------------------
// suggestions

json EditorService::suggestions(const ObjectId& project) {
    auto h = handle(project);
    json list = json::array();
    for (const auto& s : h->book.pending()) list.push_back(suggestion_to_json(s));
    return {{"revision", h->cell.revision()}, {"suggestions", list}};
}

json EditorService::accept_suggestion(const ObjectId& project, const ObjectId& suggestion,
                                      std::optional<std::int64_t> revision) {
    auto h = handle(project);
    SuggestionStatus before = h->book.get(suggestion).status;
    try {
        json result = edit(
            *h, "accept_suggestion", json::object(),
            [&](Project& p) { return h->book.accept(suggestion, p, dispatcher_, revision); }, false);
        hub_.publish(h->id, "suggestion_accepted",
                     {{"suggestion_id", suggestion.value}, {"result", result}, {"project_revision", h->cell.revision()}});
        return {{"suggestion", suggestion_to_json(h->book.get(suggestion))}, {"result", result}};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StaleSuggestion && before == SuggestionStatus::Pending &&
            h->book.get(suggestion).status == SuggestionStatus::Dismissed) {
            hub_.publish(h->id, "suggestion_dismissed",
                         {{"suggestion_id", suggestion.value}, {"reason", "stale"}, {"project_revision", h->cell.revision()}});
        }
        throw;
    }
}

void EditorService::dismiss_suggestion(const ObjectId& project, const ObjectId& suggestion) {
    auto h = handle(project);
    h->book.dismiss(suggestion);
    hub_.publish(h->id, "suggestion_dismissed",
                 {{"suggestion_id", suggestion.value}, {"reason", "user"}, {"project_revision", h->cell.revision()}});
}

json EditorService::refresh_suggestions(const ObjectId& project) {
    auto h = handle(project);
    std::set<ObjectId> clips;
    h->cell.read([&](const Project& p) {
        for (const auto& [id, c] : p.clips) {
            if (c.is_text()) clips.insert(id);
        }
    });
    recompute(*h, clips);
    return suggestions(project);
}

// ---------------------------------------------------------------------------
// chat

namespace {

template <class Fn>
ChatSession settled(Fn&& fn, const std::function<void()>& settle) {
    try {
        ChatSession s = fn();
        settle();
        return s;
    } catch (const Error&) {
        settle();
        throw;
    }
}

}  // namespace

ChatSession EditorService::start_session(const ObjectId& project, bool auto_skip) {
    auto h = handle(project);
    return settled([&] { return h->chat->start_session(auto_skip); }, [&] { settle(*h); });
}

std::vector<ChatSession> EditorService::sessions(const ObjectId& project) { return handle(project)->chat->sessions(); }

ChatSession EditorService::session(const ObjectId& project, const ObjectId& session) {
    return handle(project)->chat->session(session);
}

ChatSession EditorService::set_auto_skip(const ObjectId& project, const ObjectId& session, bool auto_skip) {
    auto h = handle(project);
    return settled(
        [&] {
            h->chat->set_auto_skip(session, auto_skip);
            return h->chat->session(session);
        },
        [&] { settle(*h); });
}

ChatSession EditorService::submit_message(const ObjectId& project, const ObjectId& session, const std::string& text,
                                          const std::vector<ObjectId>& attachments) {
    auto h = handle(project);
    return settled([&] { return h->chat->submit_message(session, text, attachments); }, [&] { settle(*h); });
}

ChatSession EditorService::approve_step(const ObjectId& project, const ObjectId& session) {
    auto h = handle(project);
    return settled([&] { return h->chat->approve_step(session); }, [&] { settle(*h); });
}

ChatSession EditorService::modify_step(const ObjectId& project, const ObjectId& session, const json& args) {
    auto h = handle(project);
    return settled([&] { return h->chat->modify_step(session, args); }, [&] { settle(*h); });
}

ChatSession EditorService::reject_step(const ObjectId& project, const ObjectId& session, const std::string& feedback) {
    auto h = handle(project);
    return settled([&] { return h->chat->reject_step(session, feedback); }, [&] { settle(*h); });
}

ChatSession EditorService::answer_prompt(const ObjectId& project, const ObjectId& session, const json& answer) {
    auto h = handle(project);
    return settled([&] { return h->chat->answer_prompt(session, answer); }, [&] { settle(*h); });
}

std::vector<std::string> EditorService::instructions(const ObjectId& project, std::optional<AgentMode> mode) {
    auto snap = snapshot(project);
    return suggest_instructions(*snap, mode.value_or(agents_.mode()), gateway_.get());
}

// ---------------------------------------------------------------------------
// assets

json EditorService::upload_asset(const ObjectId& project, const std::string& filename, const std::string& content_type,
                                 const std::string& bytes, std::optional<double> media_duration) {
    auto h = handle(project);
    AssetKind kind;
    std::string_view type = content_type;
    if (type.rfind("image/", 0) == 0) {
        kind = AssetKind::Image;
    } else if (type.rfind("audio/", 0) == 0) {
        kind = AssetKind::Audio;
    } else if (type.rfind("video/", 0) == 0) {
        kind = AssetKind::Video;
    } else {
        throw bad_request("unsupported content type", {{"content_type", content_type}});
    }
    if (kind == AssetKind::Image) media_duration.reset();

    static std::atomic<unsigned> counter{0};
    fs::path tmp = store_.root() / "assets" / (".upload-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    atomic_write(tmp, bytes);
    std::string name = filename.empty() ? std::string("upload") : filename;
    json args = {{"name", name}, {"kind", kAssetKindNames.name(kind)}, {"bytes", bytes.size()}};
    try {
        json asset = edit(*h, "upload_asset", args, [&](Project& p) {
            Asset a = add_asset(p, kind, name, "assets/pending", media_duration);
            p.assets[a.id].uri = "assets/" + a.id.value;
            fs::rename(tmp, store_.asset_path(a.id));
            return asset_to_json(p.assets[a.id]);
        });
        hub_.publish(h->id, "asset", {{"asset", asset}});
        return asset;
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

json EditorService::assets(const ObjectId& project) {
    auto snap = snapshot(project);
    json out = json::array();
    for (const auto& [id, a] : snap->assets) out.push_back(asset_to_json(a));
    return out;
}

fs::path EditorService::asset_file(const ObjectId& project, const ObjectId& asset) {
    auto snap = snapshot(project);
    (void)snap->asset(asset);
    return store_.asset_path(asset);
}

}  // namespace tae
