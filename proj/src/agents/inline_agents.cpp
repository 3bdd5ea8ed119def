#include "tae/agents/inline_agents.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tae/core/serialize.hpp"
#include "tae/core/utf8.hpp"
#include "tae/timeline/presets.hpp"

namespace tae {

namespace {

std::string fingerprint_of(const Clip& clip) { return clip_to_json(clip).dump(); }

const TextPayload& text_of(const Project& project, const ObjectId& clip_id) {
    const Clip& clip = project.clip(clip_id);
    const TextPayload* text = clip.text();
    if (!text) throw Error(ErrorCode::NotTextClip, "clip has no text", {{"clip_id", clip_id.value}});
    return *text;
}

std::string fixed2(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << v;
    return os.str();
}

Error malformed(const std::string& message, json detail = json::object()) {
    return provider_error(ProviderFailure::MalformedOutput, message, std::move(detail));
}

std::optional<CharRange> parse_range(const json& doc, std::size_t length) {
    if (!doc.contains("range") || doc["range"].is_null()) return std::nullopt;
    const json& r = doc["range"];
    if (!r.is_object() || !r.contains("begin") || !r.contains("end") || !r["begin"].is_number_integer() ||
        !r["end"].is_number_integer() || r["begin"].get<std::int64_t>() < 0 || r["end"].get<std::int64_t>() < 0) {
        throw malformed("range must be {begin,end} with non-negative integers");
    }
    CharRange range{r["begin"].get<std::size_t>(), r["end"].get<std::size_t>()};
    if (range.begin > range.end || range.end > length) {
        throw malformed("range outside the line", {{"begin", range.begin}, {"end", range.end}, {"length", length}});
    }
    return range;
}

AgentContext context_for(const Project& snapshot, json task) {
    AgentContext ctx = build_context(snapshot);
    ctx.task = std::move(task);
    return ctx;
}

}  // namespace

Suggestion make_suggestion(const Project& snapshot, SuggestionKind kind, SuggestionTarget target, json action,
                           std::string reason) {
    if (reason.empty()) throw Error(ErrorCode::InvalidField, "a suggestion needs a reason");
    const Clip& clip = snapshot.clip(target.clip_id);
    Suggestion s;
    s.kind = kind;
    s.target = std::move(target);
    s.action = std::move(action);
    s.reason = std::move(reason);
    s.revision = snapshot.revision;
    s.fingerprint = fingerprint_of(clip);
    return s;
}

json suggestion_to_json(const Suggestion& s) {
    json target = {{"clip_id", s.target.clip_id.value}};
    if (s.target.char_range) target["char_range"] = {{"begin", s.target.char_range->begin}, {"end", s.target.char_range->end}};
    return {{"id", s.id.value},
            {"kind", kSuggestionKindNames.name(s.kind)},
            {"target", target},
            {"action", s.action},
            {"reason", s.reason},
            {"status", kSuggestionStatusNames.name(s.status)},
            {"revision", s.revision}};
}

ToolCall suggestion_tool_call(const Suggestion& s, const Project& project) {
    if (s.kind == SuggestionKind::TextRevision) {
        const std::string& text = text_of(project, s.target.clip_id).content;
        std::string replacement = s.action.at("replacement").get<std::string>();
        std::string content = replacement;
        if (s.target.char_range) {
            const auto& r = *s.target.char_range;
            content = utf8::substr(text, 0, r.begin) + replacement + utf8::substr(text, r.end);
        }
        return {"update_clip", {{"id", s.target.clip_id.value}, {"content", content}}};
    }
    json args = s.action.value("params", json::object());
    args["clip_id"] = s.target.clip_id.value;
    return {"create_" + s.action.at("preset").get<std::string>(), args};
}

Suggestion SuggestionBook::add(Suggestion s) {
    if (s.reason.empty()) throw Error(ErrorCode::InvalidField, "a suggestion needs a reason");
    std::lock_guard lock(mutex_);
    s.id = ids_.next(IdKind::Sugg);
    s.status = SuggestionStatus::Pending;
    items_.push_back(s);
    return s;
}

std::vector<Suggestion> SuggestionBook::pending() const {
    std::lock_guard lock(mutex_);
    std::vector<Suggestion> out;
    for (const auto& s : items_) {
        if (s.status == SuggestionStatus::Pending) out.push_back(s);
    }
    return out;
}

std::vector<Suggestion> SuggestionBook::all() const {
    std::lock_guard lock(mutex_);
    return items_;
}

Suggestion SuggestionBook::get(const ObjectId& id) const {
    std::lock_guard lock(mutex_);
    for (const auto& s : items_) {
        if (s.id == id) return s;
    }
    throw Error(ErrorCode::UnknownSuggestion, "no such suggestion", {{"suggestion_id", id.value}});
}

json SuggestionBook::accept(const ObjectId& id, Project& project, ToolDispatcher& dispatcher,
                            std::optional<std::int64_t> client_revision) {
    std::lock_guard lock(mutex_);
    auto it = std::find_if(items_.begin(), items_.end(), [&](const Suggestion& s) { return s.id == id; });
    if (it == items_.end()) throw Error(ErrorCode::UnknownSuggestion, "no such suggestion", {{"suggestion_id", id.value}});
    auto clip = project.clips.find(it->target.clip_id);
    bool changed = clip == project.clips.end() || fingerprint_of(clip->second) != it->fingerprint;
    if (changed && it->status != SuggestionStatus::Accepted) {
        it->status = SuggestionStatus::Dismissed;
        throw Error(ErrorCode::StaleSuggestion, "target clip changed since the suggestion was made",
                    {{"suggestion_id", id.value}, {"clip_id", it->target.clip_id.value}});
    }
    if (it->status != SuggestionStatus::Pending) {
        throw Error(ErrorCode::WrongState, "suggestion is not pending",
                    {{"suggestion_id", id.value}, {"status", kSuggestionStatusNames.name(it->status)}});
    }
    if (client_revision && *client_revision < it->revision) {
        throw Error(ErrorCode::StaleSuggestion, "client revision predates the suggestion",
                    {{"suggestion_id", id.value}, {"revision", *client_revision}, {"suggestion_revision", it->revision}});
    }
    ToolCall call = suggestion_tool_call(*it, project);
    json result = dispatcher.dispatch(project, call.name, call.args, Actor::InlineAgent);
    it->status = SuggestionStatus::Accepted;
    return result;
}

void SuggestionBook::dismiss(const ObjectId& id) {
    std::lock_guard lock(mutex_);
    auto it = std::find_if(items_.begin(), items_.end(), [&](const Suggestion& s) { return s.id == id; });
    if (it == items_.end()) throw Error(ErrorCode::UnknownSuggestion, "no such suggestion", {{"suggestion_id", id.value}});
    if (it->status != SuggestionStatus::Pending) {
        throw Error(ErrorCode::WrongState, "suggestion is not pending", {{"suggestion_id", id.value}});
    }
    it->status = SuggestionStatus::Dismissed;
}

std::vector<ObjectId> SuggestionBook::invalidate_stale(const Project& project) {
    std::lock_guard lock(mutex_);
    std::vector<ObjectId> out;
    for (auto& s : items_) {
        if (s.status != SuggestionStatus::Pending) continue;
        auto clip = project.clips.find(s.target.clip_id);
        if (clip == project.clips.end() || fingerprint_of(clip->second) != s.fingerprint) {
            s.status = SuggestionStatus::Dismissed;
            out.push_back(s.id);
        }
    }
    return out;
}

std::vector<ObjectId> SuggestionBook::clear_pending(const ObjectId& clip, SuggestionKind kind) {
    std::lock_guard lock(mutex_);
    std::vector<ObjectId> out;
    for (auto& s : items_) {
        if (s.status == SuggestionStatus::Pending && s.kind == kind && s.target.clip_id == clip) {
            s.status = SuggestionStatus::Dismissed;
            out.push_back(s.id);
        }
    }
    return out;
}

void SuggestionBook::attach_markers(ScriptDocument& doc) const {
    std::lock_guard lock(mutex_);
    for (auto& line : doc.lines) {
        line.suggestion_markers.clear();
        for (const auto& s : items_) {
            if (s.status == SuggestionStatus::Pending && s.target.clip_id == line.clip_id) {
                line.suggestion_markers.push_back(s.id);
            }
        }
    }
}

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (space) {
            pending_space = !out.empty();
            continue;
        }
        bool punct = c == ',' || c == '.' || c == '!' || c == '?' || c == ';' || c == ':';
        if (pending_space && !punct) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

void log_placement_fallback(Project& project, const PlacementProposal& proposal, std::int64_t timestamp_ms) {
    json args = {{"strategy", kPlacementStrategyNames.name(proposal.decision.strategy)}};
    std::string detail = "fallback to sequential_same_track";
    if (proposal.error) {
        detail += ": " + std::string(error_code_name(proposal.error->code())) + ": " + proposal.error->what();
    }
    append_log(project, Actor::InlineAgent, "propose_clip_placement", std::move(args), false, std::move(detail),
               timestamp_ms);
}

InlineAgents::InlineAgents(AgentMode mode, std::shared_ptr<Gateway> gateway) : mode_(mode), gateway_(std::move(gateway)) {
    if (mode_ == AgentMode::Llm && !gateway_) throw Error(ErrorCode::BadRequest, "llm mode needs a gateway");
}

SemanticFeatures InlineAgents::analyze(const Project& snapshot, const std::string& line_text) const {
    if (mode_ == AgentMode::Rule) return analyze_semantics_rules(line_text);

    ProviderRequest req;
    req.template_id = TemplateId::SemanticMatching;
    req.context = context_for(snapshot, {{"operation", "analyze_semantics"}, {"line", line_text}});
    req.structured = true;
    req.constraint = OutputConstraint{"tone", kToneNames.names()};
    auto doc = std::get<Structured>(gateway_->complete(req)).document;

    SemanticFeatures f;
    if (!doc.contains("importance") || !doc["importance"].is_number()) throw malformed("importance missing");
    f.importance = doc["importance"].get<double>();
    f.tone = *kToneNames.parse(doc["tone"].get<std::string>());
    if (doc.contains("emphasis_tokens")) {
        if (!doc["emphasis_tokens"].is_array()) throw malformed("emphasis_tokens must be an array");
        for (const auto& t : doc["emphasis_tokens"]) {
            json wrapped = {{"range", t}};
            auto r = parse_range(wrapped, utf8::length(line_text));
            if (r) f.emphasis_tokens.push_back(*r);
        }
    }
    try {
        check_features(f, utf8::length(line_text));
    } catch (const Error& e) {
        throw malformed(e.what(), e.detail());
    }
    return f;
}

std::vector<Suggestion> InlineAgents::suggest_text_revisions(const Project& snapshot, const ObjectId& clip) const {
    const std::string& text = text_of(snapshot, clip).content;
    std::vector<Suggestion> out;
    if (mode_ == AgentMode::Rule) {
        std::string fixed = normalize_whitespace(text);
        if (fixed != text) {
            out.push_back(make_suggestion(snapshot, SuggestionKind::TextRevision,
                                          {clip, CharRange{0, utf8::length(text)}}, {{"replacement", fixed}},
                                          "Tidy spacing: remove repeated, leading, trailing and pre-punctuation spaces."));
        }
        return out;
    }

    ProviderRequest req;
    req.template_id = TemplateId::TextRefinement;
    req.context = context_for(snapshot, {{"operation", "suggest_text_revisions"}, {"clip_id", clip.value}, {"line", text}});
    req.structured = true;
    auto doc = std::get<Structured>(gateway_->complete(req)).document;
    if (!doc.contains("suggestions") || !doc["suggestions"].is_array()) throw malformed("suggestions array missing");

    std::size_t length = utf8::length(text);
    for (const auto& item : doc["suggestions"]) {
        if (!item.is_object() || !item.contains("replacement") || !item["replacement"].is_string()) {
            throw malformed("suggestion without replacement text");
        }
        if (!item.contains("reason") || !item["reason"].is_string() || item["reason"].get<std::string>().empty()) {
            throw malformed("suggestion without a reason");
        }
        auto range = parse_range(item, length);
        out.push_back(make_suggestion(snapshot, SuggestionKind::TextRevision, {clip, range},
                                      {{"replacement", item["replacement"]}}, item["reason"].get<std::string>()));
    }
    return out;
}

Suggestion InlineAgents::recommend_animation(const Project& snapshot, const ObjectId& clip) const {
    const std::string& text = text_of(snapshot, clip).content;
    if (mode_ == AgentMode::Rule) {
        SemanticFeatures f = analyze_semantics_rules(text);
        AnimationDirective d = map_to_directive(f);
        json action = {{"preset", d.dynamic_attrs.preset_category},
                       {"params", {{"speed", d.dynamic_attrs.velocity_scale}}}};
        std::string reason = "Tone " + std::string(kToneNames.name(f.tone)) + " with importance " + fixed2(f.importance) +
                             " maps to " + d.dynamic_attrs.preset_category + " at speed " +
                             fixed2(d.dynamic_attrs.velocity_scale) + ".";
        return make_suggestion(snapshot, SuggestionKind::AnimationRecommendation, {clip, std::nullopt}, std::move(action),
                               std::move(reason));
    }

    ProviderRequest req;
    req.template_id = TemplateId::SemanticMatching;
    req.context = context_for(snapshot, {{"operation", "recommend_animation"}, {"clip_id", clip.value}, {"line", text}});
    req.structured = true;
    auto doc = std::get<Structured>(gateway_->complete(req)).document;
    if (!doc.contains("preset") || !doc["preset"].is_string()) throw malformed("preset missing");
    std::string preset = doc["preset"].get<std::string>();
    if (!find_preset(preset)) {
        throw Error(ErrorCode::UnknownPreset, "preset is not in the catalog: " + preset, {{"preset", preset}});
    }
    json params = doc.value("params", json::object());
    if (!params.is_object()) throw malformed("params must be an object");
    try {
        make_builtin_registry().check_partial(preset, params);
    } catch (const Error& e) {
        throw malformed(std::string("invalid preset params: ") + e.what(), e.detail());
    }
    std::string reason = doc.value("reason", std::string());
    if (reason.empty()) throw malformed("recommendation without a reason");
    return make_suggestion(snapshot, SuggestionKind::AnimationRecommendation, {clip, std::nullopt},
                           {{"preset", preset}, {"params", params}}, std::move(reason));
}

PlacementProposal InlineAgents::propose_clip_placement(const Project& snapshot, const std::string& new_line_text,
                                                       const LineAnchor& anchor) const {
    ScriptDocument doc = project_script(snapshot, visible_text_tracks(snapshot));
    PlacementProposal out;
    auto sequential = [&] {
        out.decision = resolve_placement(snapshot, doc, anchor, PlacementStrategy::SequentialSameTrack);
    };
    if (mode_ == AgentMode::Rule) {
        sequential();
        out.reason = "Rule mode places new lines after the anchor on the same track.";
        return out;
    }

    // Anchor errors are the caller's, not the provider's.
    anchor_line(doc, anchor);
    ProviderRequest req;
    req.template_id = TemplateId::ClipStrategy;
    req.context = context_for(snapshot, {{"operation", "propose_clip_placement"},
                                         {"new_line", new_line_text},
                                         {"anchor", {{"position", anchor.position == AnchorPosition::Before  ? "before"
                                                                  : anchor.position == AnchorPosition::After ? "after"
                                                                                                              : "end"},
                                                     {"line_index", anchor.line_index}}}});
    req.structured = true;
    req.constraint = OutputConstraint{"strategy", kPlacementStrategyNames.names()};
    try {
        auto result = std::get<Structured>(gateway_->complete(req)).document;
        auto strategy = *kPlacementStrategyNames.parse(result["strategy"].get<std::string>());
        out.decision = resolve_placement(snapshot, doc, anchor, strategy);
        out.reason = result.value("reason", std::string());
        if (out.reason.empty()) out.reason = "Chosen by the placement model.";
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderError) throw;
        sequential();
        out.fell_back = true;
        out.error = e;
        out.reason = std::string("Provider failed (") + e.what() + "); placed after the anchor on the same track.";
    }
    return out;
}

}  // namespace tae
