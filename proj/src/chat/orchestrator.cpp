#include "tae/chat/orchestrator.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "tae/core/utf8.hpp"
#include "tae/llm/context.hpp"

namespace tae {

// ---------------------------------------------------------------------------
// wire forms

const PlanStep* ChatSession::proposed_step() const {
    for (const auto& st : steps) {
        if (st.status == StepStatus::Proposed) return &st;
    }
    return nullptr;
}

json plan_step_to_json(const PlanStep& step) {
    json out = {{"id", step.id.value},
                {"tool", step.tool},
                {"args", step.args},
                {"rationale", step.rationale},
                {"kind", kStepKindNames.name(step.kind)},
                {"status", kStepStatusNames.name(step.status)},
                {"approval", kApprovalNames.name(step.approval)},
                {"result", step.result}};
    if (step.log_seq) out["log_seq"] = *step.log_seq;
    return out;
}

json prompt_to_json(const UIPrompt& prompt) {
    json out = {{"id", prompt.id.value},
                {"kind", kPromptKindNames.name(prompt.kind)},
                {"question", prompt.question},
                {"payload", prompt.payload},
                {"bound_step", prompt.bound_step.value}};
    if (prompt.target_class) out["target_class"] = *prompt.target_class;
    return out;
}

json event_to_json(const ChatEvent& event) {
    return {{"seq", event.seq}, {"type", event.type}, {"payload", event.payload}};
}

json session_to_json(const ChatSession& s) {
    json steps = json::array();
    for (const auto& st : s.steps) steps.push_back(plan_step_to_json(st));
    json events = json::array();
    for (const auto& e : s.events) events.push_back(event_to_json(e));
    json out = {{"id", s.id.value},
                {"project_id", s.project_id.value},
                {"messages", s.messages},
                {"steps", steps},
                {"auto_skip", s.auto_skip},
                {"state", kSessionStateNames.name(s.state)},
                {"consecutive_failures", s.consecutive_failures},
                {"events", events},
                {"pending_prompt", s.pending_prompt ? prompt_to_json(*s.pending_prompt) : json(nullptr)}};
    if (s.reserved_step) out["reserved_step"] = s.reserved_step->value;
    return out;
}

namespace {

template <class E, std::size_t N>
E parse_enum(const EnumTable<E, N>& table, const json& value, const char* what) {
    auto parsed = value.is_string() ? table.parse(value.get<std::string>()) : std::nullopt;
    if (!parsed) throw Error(ErrorCode::CorruptDocument, std::string("bad ") + what, {{"value", value}});
    return *parsed;
}

UIPrompt prompt_from_json(const json& doc) {
    UIPrompt p;
    p.id = ObjectId(doc.at("id").get<std::string>());
    p.kind = parse_enum(kPromptKindNames, doc.at("kind"), "prompt kind");
    p.question = doc.value("question", std::string());
    p.payload = doc.value("payload", json::object());
    p.bound_step = ObjectId(doc.at("bound_step").get<std::string>());
    if (doc.contains("target_class")) p.target_class = doc["target_class"].get<std::string>();
    return p;
}

}  // namespace

ChatSession session_from_json(const json& doc) {
    try {
        ChatSession s;
        s.id = ObjectId(doc.at("id").get<std::string>());
        s.project_id = ObjectId(doc.value("project_id", std::string()));
        s.messages = doc.value("messages", json::array());
        for (const auto& st : doc.value("steps", json::array())) {
            PlanStep step;
            step.id = ObjectId(st.at("id").get<std::string>());
            step.tool = st.at("tool").get<std::string>();
            step.args = st.value("args", json::object());
            step.rationale = st.value("rationale", std::string());
            step.kind = parse_enum(kStepKindNames, st.at("kind"), "step kind");
            step.status = parse_enum(kStepStatusNames, st.at("status"), "step status");
            step.approval = parse_enum(kApprovalNames, st.value("approval", json("none")), "approval");
            step.result = st.value("result", json());
            if (st.contains("log_seq")) step.log_seq = st["log_seq"].get<std::int64_t>();
            s.steps.push_back(std::move(step));
        }
        s.auto_skip = doc.value("auto_skip", false);
        s.state = parse_enum(kSessionStateNames, doc.at("state"), "session state");
        s.consecutive_failures = doc.value("consecutive_failures", 0);
        for (const auto& e : doc.value("events", json::array())) {
            s.events.push_back({e.at("seq").get<std::int64_t>(), e.at("type").get<std::string>(), e.value("payload", json::object())});
        }
        if (doc.contains("pending_prompt") && !doc["pending_prompt"].is_null()) s.pending_prompt = prompt_from_json(doc["pending_prompt"]);
        if (doc.contains("reserved_step")) s.reserved_step = ObjectId(doc["reserved_step"].get<std::string>());
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptDocument, std::string("bad chat session: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// references

std::vector<ReferenceToken> resolve_references(const std::string& text, const Project& project) {
    static const std::regex token(R"(@\{([a-z]+):([A-Za-z0-9_]+)\})");
    std::vector<ReferenceToken> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), token); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        std::string kind = m[1];
        auto id_kind = id_kind_from_prefix(kind);
        if (!id_kind) continue;
        ReferenceToken t;
        t.raw = m[0];
        t.kind = kind;
        t.id = ObjectId(m[2]);
        t.offset = static_cast<std::size_t>(m.position(0));
        t.resolved = t.id.kind() == id_kind && project.has_object(t.id);
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// instruction suggestions

namespace {

std::string clip_chars(const std::string& text, std::size_t n) {
    if (utf8::length(text) <= n) return text;
    return utf8::substr(text, 0, n - 3) + "...";
}

std::vector<std::string> rule_instructions(const Project& p) {
    std::vector<std::string> out;
    if (p.clips.empty()) {
        out.emplace_back("Create a draft from the script");
        if (p.assets.empty()) out.emplace_back("Upload an image or video for the background");
        return out;
    }

    std::size_t unanimated = 0;
    std::set<std::string> fonts;
    std::set<ObjectId> used_assets;
    const Clip* key_line = nullptr;
    double key_importance = 0.0;
    for (const auto& [id, c] : p.clips) {
        if (const auto* text = c.text()) {
            if (p.animations_of(id).empty()) ++unanimated;
            fonts.insert(text->style.font_family);
            double imp = analyze_semantics_rules(text->content).importance;
            if (imp > key_importance) {
                key_importance = imp;
                key_line = &c;
            }
        } else if (const auto* media = std::get_if<MediaPayload>(&c.payload)) {
            used_assets.insert(media->asset_ref);
        }
    }
    if (unanimated > 0) out.emplace_back("Add entrance animations to the " + std::to_string(unanimated) + " lines without one");
    if (p.assets.empty()) {
        out.emplace_back("Upload an image or video for the background");
    } else if (used_assets.size() < p.assets.size()) {
        out.emplace_back("Place the uploaded media on the timeline");
    }
    if (key_line && key_importance >= 0.5) {
        out.emplace_back("Make the line \"" + clip_chars(key_line->text()->content, 40) + "\" stand out");
    }
    if (!p.operation_log.empty() && !p.operation_log.back().ok) {
        out.emplace_back("Retry the last failed edit (" + p.operation_log.back().tool + ")");
    }
    if (fonts.size() > 1) out.emplace_back("Use one font across all lines");
    if (out.size() > kMaxInstructionSuggestions) out.resize(kMaxInstructionSuggestions);
    for (auto& s : out) s = clip_chars(s, kMaxInstructionChars);
    return out;
}

}  // namespace

std::vector<std::string> suggest_instructions(const Project& snapshot, AgentMode mode, Gateway* gateway) {
    if (mode == AgentMode::Rule || !gateway) return rule_instructions(snapshot);
    ProviderRequest req;
    req.template_id = TemplateId::InstructionSuggestions;
    req.context = build_context(snapshot);
    req.context.task = {{"operation", "suggest_instructions"},
                        {"max_items", kMaxInstructionSuggestions},
                        {"max_chars", kMaxInstructionChars}};
    req.structured = true;
    try {
        auto doc = std::get<Structured>(gateway->complete(req)).document;
        std::vector<std::string> out;
        if (doc.contains("suggestions") && doc["suggestions"].is_array()) {
            for (const auto& item : doc["suggestions"]) {
                if (!item.is_string()) continue;
                std::string s = item.get<std::string>();
                if (s.empty() || utf8::length(s) > kMaxInstructionChars) continue;
                out.push_back(std::move(s));
                if (out.size() == kMaxInstructionSuggestions) break;
            }
        }
        if (!out.empty()) return out;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderError) throw;
    }
    return rule_instructions(snapshot);
}

// ---------------------------------------------------------------------------
// orchestrator

ChatOrchestrator::ChatOrchestrator(ProjectCell& cell, ToolDispatcher& dispatcher, std::shared_ptr<Gateway> gateway,
                                   std::uint64_t seed)
    : cell_(cell), dispatcher_(dispatcher), gateway_(std::move(gateway)), ids_(seed) {
    if (!gateway_) throw Error(ErrorCode::BadRequest, "chat needs a gateway");
}

void ChatOrchestrator::set_event_sink(EventSink sink) {
    std::lock_guard lock(mutex_);
    sink_ = std::move(sink);
}

ObjectId ChatOrchestrator::new_id(IdKind kind) {
    std::lock_guard lock(mutex_);
    return ids_.next(kind);
}

std::shared_ptr<ChatOrchestrator::Slot> ChatOrchestrator::slot(const ObjectId& id) const {
    std::lock_guard lock(mutex_);
    auto it = slots_.find(id);
    if (it == slots_.end()) throw Error(ErrorCode::UnknownSession, "no such chat session", {{"session_id", id.value}});
    return it->second;
}

void ChatOrchestrator::publish(const ChatSession& s) {
    std::lock_guard lock(mutex_);
    published_[s.id] = s;
}

void ChatOrchestrator::emit(ChatSession& s, std::string type, json payload) {
    payload["session_id"] = s.id.value;
    payload["state"] = kSessionStateNames.name(s.state);
    ChatEvent ev{static_cast<std::int64_t>(s.events.size()) + 1, std::move(type), std::move(payload)};
    s.events.push_back(ev);
    publish(s);
    EventSink sink;
    {
        std::lock_guard lock(mutex_);
        sink = sink_;
    }
    if (sink) sink(s.id, ev);
}

ChatSession ChatOrchestrator::start_session(bool auto_skip) {
    auto sl = std::make_shared<Slot>();
    sl->live.id = new_id(IdKind::Sess);
    sl->live.project_id = cell_.read([](const Project& p) { return p.id; });
    sl->live.auto_skip = auto_skip;
    {
        std::lock_guard lock(mutex_);
        slots_[sl->live.id] = sl;
        published_[sl->live.id] = sl->live;
    }
    return sl->live;
}

void ChatOrchestrator::set_auto_skip(const ObjectId& session, bool auto_skip) {
    auto sl = slot(session);
    std::unique_lock lock(sl->mutex, std::try_to_lock);
    if (!lock) throw Error(ErrorCode::SessionBusy, "session is busy", {{"session_id", session.value}});
    sl->live.auto_skip = auto_skip;
    publish(sl->live);
}

ChatSession ChatOrchestrator::session(const ObjectId& id) const {
    std::lock_guard lock(mutex_);
    auto it = published_.find(id);
    if (it == published_.end()) throw Error(ErrorCode::UnknownSession, "no such chat session", {{"session_id", id.value}});
    return it->second;
}

std::vector<ChatSession> ChatOrchestrator::sessions() const {
    std::lock_guard lock(mutex_);
    std::vector<ChatSession> out;
    for (const auto& [id, s] : published_) out.push_back(s);
    return out;
}

void ChatOrchestrator::restore(const std::vector<ChatSession>& sessions) {
    std::lock_guard lock(mutex_);
    for (ChatSession s : sessions) {
        ids_.reserve(s.id);
        for (const auto& st : s.steps) ids_.reserve(st.id);
        if (s.pending_prompt) ids_.reserve(s.pending_prompt->id);
        if (s.reserved_step) ids_.reserve(*s.reserved_step);
        if (s.state == SessionState::Planning || s.state == SessionState::Executing) {
            s.state = SessionState::Idle;
            s.messages.push_back({{"role", "system"}, {"text", "The previous request was interrupted by a restart."}});
        }
        auto sl = std::make_shared<Slot>();
        sl->live = s;
        slots_[s.id] = sl;
        published_[s.id] = s;
    }
}

namespace {

Error busy(const ObjectId& id) { return Error(ErrorCode::SessionBusy, "session is busy", {{"session_id", id.value}}); }

Error wrong_state(const ChatSession& s, std::string_view expected) {
    return Error(ErrorCode::WrongState, "session is " + std::string(kSessionStateNames.name(s.state)),
                 {{"session_id", s.id.value}, {"state", kSessionStateNames.name(s.state)}, {"expected", expected}});
}

PlanStep& proposed(ChatSession& s) {
    for (auto& st : s.steps) {
        if (st.status == StepStatus::Proposed) return st;
    }
    throw Error(ErrorCode::WrongState, "no proposed step", {{"session_id", s.id.value}});
}

Error invalid_answer(const std::string& message, json detail = json::object()) {
    return Error(ErrorCode::InvalidAnswer, message, std::move(detail));
}

}  // namespace

ChatSession ChatOrchestrator::submit_message(const ObjectId& session, const std::string& text,
                                             const std::vector<ObjectId>& attachments) {
    auto sl = slot(session);
    std::unique_lock lock(sl->mutex, std::try_to_lock);
    if (!lock) throw busy(session);
    ChatSession& s = sl->live;
    if (s.state == SessionState::Planning || s.state == SessionState::Executing) throw busy(session);
    if (s.state != SessionState::Idle && s.state != SessionState::Done) throw wrong_state(s, "idle or done");

    auto snap = cell_.snapshot();
    json refs = json::array();
    for (const auto& t : resolve_references(text, *snap)) {
        if (!t.resolved) {
            throw Error(ErrorCode::DanglingReference, "reference does not resolve: " + t.raw,
                        {{"token", t.raw}, {"offset", t.offset}});
        }
        refs.push_back({{"token", t.raw}, {"kind", t.kind}, {"id", t.id.value}, {"label", describe_object(*snap, t.id)}});
    }
    json attached = json::array();
    for (const auto& a : attachments) {
        if (!snap->assets.count(a)) {
            throw Error(ErrorCode::DanglingReference, "attachment is not a live asset", {{"token", a.value}});
        }
        attached.push_back({{"id", a.value}, {"label", describe_object(*snap, a)}});
    }

    json msg = {{"role", "user"}, {"text", text}};
    if (!refs.empty()) msg["references"] = refs;
    if (!attached.empty()) msg["attachments"] = attached;
    s.messages.push_back(std::move(msg));
    s.consecutive_failures = 0;
    s.state = SessionState::Planning;
    publish(s);
    run(s);
    return s;
}

ChatSession ChatOrchestrator::approve_step(const ObjectId& session) {
    auto sl = slot(session);
    std::unique_lock lock(sl->mutex, std::try_to_lock);
    if (!lock) throw busy(session);
    ChatSession& s = sl->live;
    if (s.state != SessionState::AwaitingApproval) throw wrong_state(s, "awaiting_approval");
    PlanStep& step = proposed(s);
    step.status = StepStatus::Approved;
    step.approval = Approval::User;
    execute_step(s, step);
    run(s);
    return s;
}

ChatSession ChatOrchestrator::modify_step(const ObjectId& session, const json& new_args) {
    auto sl = slot(session);
    std::unique_lock lock(sl->mutex, std::try_to_lock);
    if (!lock) throw busy(session);
    ChatSession& s = sl->live;
    if (s.state != SessionState::AwaitingApproval) throw wrong_state(s, "awaiting_approval");
    PlanStep& step = proposed(s);
    dispatcher_.validate(step.tool, new_args);
    step.args = new_args;
    step.status = StepStatus::Modified;
    step.approval = Approval::UserModified;
    execute_step(s, step);
    run(s);
    return s;
}

ChatSession ChatOrchestrator::reject_step(const ObjectId& session, const std::string& feedback) {
    auto sl = slot(session);
    std::unique_lock lock(sl->mutex, std::try_to_lock);
    if (!lock) throw busy(session);
    ChatSession& s = sl->live;
    if (s.state != SessionState::AwaitingApproval) throw wrong_state(s, "awaiting_approval");
    PlanStep& step = proposed(s);
    step.status = StepStatus::Rejected;
    s.messages.push_back({{"role", "user"},
                          {"kind", "rejection"},
                          {"step_id", step.id.value},
                          {"tool", step.tool},
                          {"args", step.args},
                          {"text", feedback.empty() ? std::string("The user rejected this step.") : feedback}});
    s.state = SessionState::Planning;
    emit(s, "step_result", {{"step", plan_step_to_json(step)}});
    record_failure(s);
    run(s);
    return s;
}

ChatSession ChatOrchestrator::answer_prompt(const ObjectId& session, const json& answer) {
    auto sl = slot(session);
    std::unique_lock lock(sl->mutex, std::try_to_lock);
    if (!lock) throw busy(session);
    ChatSession& s = sl->live;
    if (s.state != SessionState::AwaitingPromptAnswer || !s.pending_prompt) throw wrong_state(s, "awaiting_prompt_answer");
    const UIPrompt& prompt = *s.pending_prompt;

    json normalized;
    switch (prompt.kind) {
        case PromptKind::Selector: {
            json pick = answer.is_object() ? answer.value("id", answer.value("option_id", json())) : answer;
            if (!pick.is_string()) throw invalid_answer("selector answer must be an option id");
            const auto& options = prompt.payload.at("options");
            bool listed = std::any_of(options.begin(), options.end(), [&](const json& o) { return o.at("id") == pick; });
            if (!listed) throw invalid_answer("option is not listed", {{"answer", pick}});
            normalized = {{"selected", pick}};
            break;
        }
        case PromptKind::ParameterForm: {
            if (!answer.is_object() || answer.empty()) throw invalid_answer("form answer must be a non-empty object");
            const MetaClass& cls = dispatcher_.registry().get(*prompt.target_class);
            for (const auto& [key, value] : answer.items()) {
                const MetaField* field = cls.field(key);
                if (!field) throw invalid_answer("unknown form field: " + key, {{"field", key}});
                if (auto why = field->check(value)) throw invalid_answer(*why, {{"field", key}, {"value", value}});
            }
            normalized = {{"values", answer}};
            break;
        }
        case PromptKind::UploadButton: {
            json id = answer.is_object() ? answer.value("asset_id", json()) : answer;
            if (!id.is_string()) throw invalid_answer("upload answer must be an asset id");
            ObjectId aid(id.get<std::string>());
            bool ok = cell_.read([&](const Project& p) {
                auto it = p.assets.find(aid);
                if (it == p.assets.end()) return false;
                const auto& kinds = prompt.payload.value("accepted_kinds", json::array());
                return std::find(kinds.begin(), kinds.end(), json(kAssetKindNames.name(it->second.kind))) != kinds.end();
            });
            if (!ok) throw invalid_answer("not an uploaded asset of an accepted kind", {{"answer", id}});
            normalized = {{"asset_id", id}};
            break;
        }
    }

    s.messages.push_back({{"role", "user"},
                          {"kind", "clarification"},
                          {"prompt_id", prompt.id.value},
                          {"question", prompt.question},
                          {"bound_step", prompt.bound_step.value},
                          {"answer", normalized}});
    s.pending_prompt.reset();
    s.state = SessionState::Planning;
    publish(s);
    run(s);
    return s;
}

void ChatOrchestrator::record_failure(ChatSession& s) {
    ++s.consecutive_failures;
    if (s.consecutive_failures >= kMaxConsecutiveFailures) {
        s.state = SessionState::Failed;
        s.messages.push_back({{"role", "system"}, {"text", "Stopped after three consecutive failed or rejected steps."}});
        emit(s, "failed", {{"reason", "failure_budget"}, {"failures", s.consecutive_failures}});
    }
}

void ChatOrchestrator::run(ChatSession& s) {
    int iterations = 0;
    while (s.state == SessionState::Planning) {
        if (++iterations > kMaxPlanIterations) {
            s.state = SessionState::Failed;
            s.messages.push_back({{"role", "system"}, {"text", "Stopped: too many planning rounds for one request."}});
            emit(s, "failed", {{"reason", "iteration_limit"}});
            return;
        }
        plan_next(s);
    }
}

void ChatOrchestrator::plan_next(ChatSession& s) {
    auto snap = cell_.snapshot();
    ProviderRequest req;
    req.template_id = TemplateId::IntentComprehension;
    req.context = build_context(*snap, s.messages);
    req.context.task = {{"session_id", s.id.value}, {"auto_skip", s.auto_skip}};
    req.tools = dispatcher_.tools();

    auto fail = [&](const Error& e) {
        s.state = SessionState::Failed;
        s.messages.push_back({{"role", "system"}, {"text", std::string("Provider error: ") + e.what()}});
        emit(s, "failed", {{"reason", "provider_error"}, {"error", e.to_json()}});
    };

    ProviderResponse response;
    try {
        response = gateway_->complete(req);
        if (const auto* c = std::get_if<Clarify>(&response);
            c && c->needed == ClarifyNeed::Parameters && !(c->target_class && dispatcher_.registry().contains(*c->target_class))) {
            throw provider_error(ProviderFailure::MalformedOutput, "parameter clarification needs a registered target_class");
        }
    } catch (const Error& e) {
        fail(e);
        return;
    }

    if (const auto* call = std::get_if<ToolCall>(&response)) {
        const ToolDescriptor* desc = dispatcher_.find(call->name);
        PlanStep step;
        step.id = s.reserved_step ? *s.reserved_step : new_id(IdKind::Step);
        s.reserved_step.reset();
        step.tool = call->name;
        step.args = call->args;
        step.kind = desc->verb == ToolVerb::Query ? StepKind::Query : StepKind::Edit;
        step.rationale = call->rationale;
        if (step.rationale.empty()) {
            step.rationale = "Run " + step.tool;
            for (const char* key : {"id", "clip_id", "track_id"}) {
                if (step.args.contains(key) && step.args[key].is_string()) {
                    step.rationale += " on " + describe_object(*snap, ObjectId(step.args[key].get<std::string>()));
                    break;
                }
            }
            step.rationale += ".";
        }
        s.messages.push_back({{"role", "assistant"},
                              {"step_id", step.id.value},
                              {"tool", step.tool},
                              {"args", step.args},
                              {"rationale", step.rationale}});
        s.steps.push_back(step);
        PlanStep& stored = s.steps.back();
        emit(s, "plan_proposed", {{"step", plan_step_to_json(stored)}});
        if (stored.kind == StepKind::Query || s.auto_skip) {
            stored.status = StepStatus::Approved;
            stored.approval = stored.kind == StepKind::Query ? Approval::AutoQuery : Approval::AutoSkip;
            execute_step(s, stored);
        } else {
            s.state = SessionState::AwaitingApproval;
            emit(s, "awaiting_approval", {{"step_id", stored.id.value}});
        }
        return;
    }

    if (const auto* c = std::get_if<Clarify>(&response)) {
        UIPrompt prompt;
        prompt.id = new_id(IdKind::Prompt);
        prompt.question = c->question;
        prompt.target_class = c->target_class;
        if (!s.reserved_step) s.reserved_step = new_id(IdKind::Step);
        prompt.bound_step = *s.reserved_step;
        switch (c->needed) {
            case ClarifyNeed::Selection: {
                prompt.kind = PromptKind::Selector;
                json options = json::array();
                for (const auto& id : c->candidates) options.push_back({{"id", id.value}, {"label", describe_object(*snap, id)}});
                prompt.payload = {{"options", options}};
                break;
            }
            case ClarifyNeed::Parameters:
                prompt.kind = PromptKind::ParameterForm;
                prompt.payload = {{"fields", dispatcher_.registry().reflect_schema(*c->target_class)}};
                break;
            case ClarifyNeed::Upload:
                prompt.kind = PromptKind::UploadButton;
                prompt.payload = {{"accepted_kinds", kAssetKindNames.names()}};
                break;
        }
        s.messages.push_back({{"role", "assistant"}, {"prompt_id", prompt.id.value}, {"question", prompt.question}});
        s.pending_prompt = prompt;
        s.state = SessionState::AwaitingPromptAnswer;
        emit(s, "prompt", {{"prompt", prompt_to_json(prompt)}});
        return;
    }

    if (const auto* text = std::get_if<AssistantText>(&response)) {
        s.messages.push_back({{"role", "assistant"}, {"text", text->text}});
        s.reserved_step.reset();
        emit(s, "assistant_text", {{"text", text->text}});
        s.state = SessionState::Done;
        emit(s, "completed", {{"steps", s.steps.size()}});
        return;
    }

    fail(provider_error(ProviderFailure::MalformedOutput, "unexpected structured reply to a planning request"));
}

void ChatOrchestrator::execute_step(ChatSession& s, PlanStep& step) {
    s.state = SessionState::Executing;
    publish(s);

    std::optional<Error> failure;
    json result;
    std::int64_t seq = 0;
    cell_.mutate([&](Project& p) {
        try {
            result = dispatcher_.dispatch(p, step.tool, step.args, Actor::ChatAgent);
            if (result.is_object() && result.value("rolled_back", false)) {
                const json& fe = result["first_error"];
                auto code = std::find_if(all_error_codes().begin(), all_error_codes().end(), [&](ErrorCode c) {
                    return error_code_name(c) == fe["error"]["code"].get<std::string>();
                });
                failure = Error(code == all_error_codes().end() ? ErrorCode::Internal : *code,
                                fe["error"]["message"].get<std::string>(), {{"batch", result}});
            }
        } catch (const Error& e) {
            failure = e;
        }
        if (!p.operation_log.empty()) seq = p.operation_log.back().seq;
    });

    step.log_seq = seq;
    if (failure) {
        step.status = StepStatus::Failed;
        step.result = failure->to_json();
        s.messages.push_back({{"role", "tool"}, {"step_id", step.id.value}, {"tool", step.tool}, {"ok", false}, {"error", step.result}});
        s.state = SessionState::Planning;
        emit(s, "step_result", {{"step", plan_step_to_json(step)}});
        record_failure(s);
        return;
    }
    step.status = StepStatus::Executed;
    step.result = result;
    s.consecutive_failures = 0;
    s.messages.push_back({{"role", "tool"}, {"step_id", step.id.value}, {"tool", step.tool}, {"ok", true}, {"result", result}});
    s.state = SessionState::Planning;
    emit(s, "step_result", {{"step", plan_step_to_json(step)}});
}

}  // namespace tae
