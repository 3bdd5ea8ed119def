#include <doctest.h>

#include <condition_variable>
#include <thread>

#include "support/test_util.hpp"
#include "tae/chat/orchestrator.hpp"
#include "tae/core/utf8.hpp"
#include "tae/timeline/presets.hpp"
#include "tae/timeline/timeline.hpp"

using namespace tae;
using tae::testing::code_of;
using tae::testing::detail_of;

namespace {

json call(const std::string& tool, json args, std::string rationale = "") {
    json out = {{"type", "tool_call"}, {"name", tool}, {"args", std::move(args)}};
    if (!rationale.empty()) out["rationale"] = rationale;
    return out;
}

json say(const std::string& text) { return {{"type", "assistant_text"}, {"text", text}}; }

struct Fixture {
    MetaRegistry registry = make_builtin_registry();
    ToolDispatcher dispatcher{registry, tae::testing::fixed_clock};
    ObjectId track, c1, c2, c3, asset;
    std::unique_ptr<ProjectCell> cell;
    std::shared_ptr<MockProvider> mock = std::make_shared<MockProvider>();
    std::unique_ptr<ChatOrchestrator> orch;
    std::vector<std::string> proposed_violations;

    Fixture() {
        Project p = make_project(33);
        track = add_track(p, TrackKind::Text, "Titles").id;
        c1 = add_clip(p, track, TimeMs{0}, TimeMs{2000}, TextPayload{"Welcome to the show", {}}).id;
        c2 = add_clip(p, track, TimeMs{2000}, TimeMs{2000}, TextPayload{"Hurry, big sale today!", {}}).id;
        c3 = add_clip(p, track, TimeMs{4000}, TimeMs{2000}, TextPayload{"See you soon", {}}).id;
        asset = add_asset(p, AssetKind::Image, "logo.png", "assets/logo.png", std::nullopt).id;
        cell = std::make_unique<ProjectCell>(std::move(p));
        orch = std::make_unique<ChatOrchestrator>(*cell, dispatcher, std::make_shared<Gateway>(mock), 7);
        // One-step planning is checked after every emitted event.
        orch->set_event_sink([this](const ObjectId& sid, const ChatEvent&) {
            auto s = orch->session(sid);
            auto n = std::count_if(s.steps.begin(), s.steps.end(),
                                   [](const PlanStep& st) { return st.status == StepStatus::Proposed; });
            if (n > 1) proposed_violations.push_back(sid.value);
        });
    }

    void script(std::vector<json> entries) {
        for (auto& e : entries) mock->push(std::move(e));
    }

    [[nodiscard]] std::vector<OperationLogEntry> chat_log() const {
        return cell->read([](const Project& p) {
            std::vector<OperationLogEntry> out;
            for (const auto& e : p.operation_log) {
                if (e.actor == Actor::ChatAgent) out.push_back(e);
            }
            return out;
        });
    }
};

std::vector<std::string> event_types(const ChatSession& s) {
    std::vector<std::string> out;
    for (const auto& e : s.events) out.push_back(e.type);
    return out;
}

/**
 * @brief Joins chat-agent log entries with plan steps.
 *
 * Without auto_skip every edit dispatch must belong to a step that was
 * surfaced for approval and then approved or modified by the user.
 */
void check_approval_gate(const ChatSession& s, const std::vector<OperationLogEntry>& log) {
    for (const auto& entry : log) {
        auto it = std::find_if(s.steps.begin(), s.steps.end(),
                               [&](const PlanStep& st) { return st.log_seq && *st.log_seq == entry.seq; });
        REQUIRE(it != s.steps.end());
        CHECK(it->tool == entry.tool);
        if (it->kind == StepKind::Query) {
            CHECK(it->approval == Approval::AutoQuery);
            continue;
        }
        if (s.auto_skip) {
            CHECK(it->approval == Approval::AutoSkip);
            continue;
        }
        CHECK((it->approval == Approval::User || it->approval == Approval::UserModified));
        std::int64_t gate = -1, result = -1;
        for (const auto& e : s.events) {
            if (e.type == "awaiting_approval" && e.payload["step_id"] == it->id.value) gate = e.seq;
            if (e.type == "step_result" && e.payload["step"]["id"] == it->id.value) result = e.seq;
        }
        CHECK(gate > 0);
        CHECK(result > gate);
    }
    for (const auto& st : s.steps) {
        if (st.kind != StepKind::Query) continue;
        for (const auto& e : s.events) {
            CHECK_FALSE((e.type == "awaiting_approval" && e.payload["step_id"] == st.id.value));
        }
    }
}

}  // namespace

TEST_CASE("sessions start idle and are independent") {
    Fixture f;
    auto a = f.orch->start_session();
    auto b = f.orch->start_session();
    CHECK(a.id != b.id);
    CHECK(a.state == SessionState::Idle);
    CHECK(a.messages.empty());
    CHECK(a.project_id == f.cell->read([](const Project& p) { return p.id; }));
    CHECK(ObjectId::well_formed(a.id.value, IdKind::Sess));
    CHECK(code_of([&] { (void)f.orch->session(ObjectId("sess_00000000")); }) == ErrorCode::UnknownSession);
}

TEST_CASE("scenario: plain three-step edit") {
    Fixture f;
    f.script({call("update_clip", {{"id", f.c1.value}, {"start", 10.0}}, "Move the greeting to the end."),
              call("update_clip", {{"id", f.c2.value}, {"content", "Huge sale today!"}}),
              call("create_bounce", {{"clip_id", f.c2.value}, {"speed", 2.0}}), say("All three edits are in.")});
    auto s = f.orch->start_session();
    auto rev0 = f.cell->revision();

    s = f.orch->submit_message(s.id, "Move the intro to the end and make the sale pop");
    CHECK(s.state == SessionState::AwaitingApproval);
    REQUIRE(s.proposed_step());
    CHECK(s.proposed_step()->rationale == "Move the greeting to the end.");
    CHECK(f.cell->revision() == rev0);

    s = f.orch->approve_step(s.id);
    CHECK(s.state == SessionState::AwaitingApproval);
    CHECK(f.cell->revision() == rev0 + 1);
    CHECK(s.proposed_step()->rationale.find("update_clip") != std::string::npos);
    s = f.orch->approve_step(s.id);
    s = f.orch->approve_step(s.id);
    CHECK(s.state == SessionState::Done);
    CHECK(f.cell->revision() == rev0 + 3);

    CHECK(event_types(s) == std::vector<std::string>{"plan_proposed", "awaiting_approval", "step_result", "plan_proposed",
                                                     "awaiting_approval", "step_result", "plan_proposed",
                                                     "awaiting_approval", "step_result", "assistant_text", "completed"});
    for (std::size_t i = 0; i < s.events.size(); ++i) CHECK(s.events[i].seq == static_cast<std::int64_t>(i) + 1);

    auto log = f.chat_log();
    REQUIRE(log.size() == 3);
    CHECK(log[0].tool == "update_clip");
    CHECK(log[1].tool == "update_clip");
    CHECK(log[2].tool == "create_bounce");
    CHECK(log[0].seq < log[1].seq);
    CHECK(log[1].seq < log[2].seq);
    for (const auto& e : log) CHECK(e.ok);
    check_approval_gate(s, log);
    for (const auto& st : s.steps) {
        CHECK(st.status == StepStatus::Executed);
        CHECK(st.approval == Approval::User);
    }
    CHECK(f.cell->read([&](const Project& p) { return p.clip(f.c1).start; }) == TimeMs{10000});
    CHECK(f.proposed_violations.empty());
    CHECK(f.mock->remaining() == 0);
}

TEST_CASE("scenario: query steps execute without approval") {
    Fixture f;
    f.script({call("query_clip", {{"id", f.c1.value}}), say("The greeting starts at 0 s.")});
    auto s = f.orch->start_session();
    auto rev0 = f.cell->revision();
    s = f.orch->submit_message(s.id, "When does the greeting start?");
    CHECK(s.state == SessionState::Done);
    CHECK(event_types(s) == std::vector<std::string>{"plan_proposed", "step_result", "assistant_text", "completed"});
    REQUIRE(s.steps.size() == 1);
    CHECK(s.steps[0].kind == StepKind::Query);
    CHECK(s.steps[0].approval == Approval::AutoQuery);
    CHECK(s.steps[0].result["id"] == f.c1.value);
    CHECK(f.cell->revision() == rev0);
    check_approval_gate(s, f.chat_log());
    // The tool result is fed back to the planner.
    auto calls = f.mock->calls();
    REQUIRE(calls.size() == 2);
    CHECK(calls[1].prompt.dump().find("Welcome to the show") != std::string::npos);
}

TEST_CASE("scenario: auto-skip approves every edit") {
    Fixture f;
    f.script({call("update_clip", {{"id", f.c3.value}, {"content", "See you tomorrow"}}),
              call("create_fade_in", {{"clip_id", f.c3.value}}), say("Done.")});
    auto s = f.orch->start_session(true);
    s = f.orch->submit_message(s.id, "Change the closing line and fade it in");
    CHECK(s.state == SessionState::Done);
    CHECK(event_types(s) ==
          std::vector<std::string>{"plan_proposed", "step_result", "plan_proposed", "step_result", "assistant_text", "completed"});
    auto log = f.chat_log();
    CHECK(log.size() == 2);
    check_approval_gate(s, log);
    for (const auto& st : s.steps) CHECK(st.approval == Approval::AutoSkip);
}

TEST_CASE("scenario: reject then replan") {
    Fixture f;
    f.script({call("delete_clip", {{"id", f.c1.value}}), call("update_clip", {{"id", f.c1.value}, {"content", "Welcome!"}}),
              say("Shortened the greeting instead.")});
    auto s = f.orch->start_session();
    s = f.orch->submit_message(s.id, "The intro is too long");
    auto rev0 = f.cell->revision();
    s = f.orch->reject_step(s.id, "Keep the clip, just shorten the wording");
    CHECK(s.state == SessionState::AwaitingApproval);
    CHECK(s.steps[0].status == StepStatus::Rejected);
    CHECK(f.cell->revision() == rev0);
    CHECK(s.consecutive_failures == 1);

    // The second planning call sees the rejection in its context.
    auto calls = f.mock->calls();
    REQUIRE(calls.size() == 2);
    const json& dialog = calls[1].request.context.dialog;
    REQUIRE(!dialog.empty());
    const json& last = dialog.back();
    CHECK(last["kind"] == "rejection");
    CHECK(last["tool"] == "delete_clip");
    CHECK(last["text"] == "Keep the clip, just shorten the wording");
    CHECK(calls[1].prompt.dump().find("Keep the clip, just shorten the wording") != std::string::npos);

    s = f.orch->approve_step(s.id);
    CHECK(s.state == SessionState::Done);
    CHECK(s.consecutive_failures == 0);
    CHECK(event_types(s) == std::vector<std::string>{"plan_proposed", "awaiting_approval", "step_result", "plan_proposed",
                                                     "awaiting_approval", "step_result", "assistant_text", "completed"});
    CHECK(s.events[2].payload["step"]["status"] == "rejected");
    auto log = f.chat_log();
    REQUIRE(log.size() == 1);
    CHECK(log[0].tool == "update_clip");
    check_approval_gate(s, log);
}

TEST_CASE("scenario: ambiguity prompt resumes planning") {
    Fixture f;
    f.script({{{"type", "clarify"},
               {"question", "Which clip?"},
               {"needed", "selection"},
               {"candidates", {f.c1.value, f.c2.value, f.c3.value}}},
              call("create_bounce", {{"clip_id", f.c2.value}}), say("Bounce added.")});
    auto s = f.orch->start_session();
    s = f.orch->submit_message(s.id, "Make that line bounce");
    CHECK(s.state == SessionState::AwaitingPromptAnswer);
    REQUIRE(s.pending_prompt);
    const UIPrompt prompt = *s.pending_prompt;
    CHECK(prompt.kind == PromptKind::Selector);
    CHECK(prompt.question == "Which clip?");
    const json& options = prompt.payload["options"];
    REQUIRE(options.size() == 3);
    for (const auto& o : options) {
        CHECK(f.cell->read([&](const Project& p) { return p.has_object(ObjectId(o["id"].get<std::string>())); }));
        CHECK_FALSE(o["label"].get<std::string>().empty());
    }
    CHECK(options[1]["label"].get<std::string>().find("Hurry, big sale today!") != std::string::npos);

    CHECK(code_of([&] { f.orch->approve_step(s.id); }) == ErrorCode::WrongState);
    CHECK(code_of([&] { f.orch->answer_prompt(s.id, f.track.value); }) == ErrorCode::InvalidAnswer);
    CHECK(code_of([&] { f.orch->answer_prompt(s.id, 3); }) == ErrorCode::InvalidAnswer);
    CHECK(f.orch->session(s.id).state == SessionState::AwaitingPromptAnswer);

    s = f.orch->answer_prompt(s.id, f.c2.value);
    CHECK(s.state == SessionState::AwaitingApproval);
    CHECK_FALSE(s.pending_prompt);
    REQUIRE(s.proposed_step());
    CHECK(s.proposed_step()->id == prompt.bound_step);

    auto calls = f.mock->calls();
    REQUIRE(calls.size() == 2);
    const json& clar = calls[1].request.context.dialog.back();
    CHECK(clar["kind"] == "clarification");
    CHECK(clar["answer"]["selected"] == f.c2.value);

    s = f.orch->approve_step(s.id);
    CHECK(s.state == SessionState::Done);
    CHECK(event_types(s) == std::vector<std::string>{"prompt", "plan_proposed", "awaiting_approval", "step_result",
                                                     "assistant_text", "completed"});
    check_approval_gate(s, f.chat_log());
}

TEST_CASE("scenario: three consecutive failures end the session") {
    Fixture f;
    // Each move lands c1 on top of c2.
    for (int i = 0; i < 3; ++i) f.mock->push(call("update_clip", {{"id", f.c1.value}, {"start", 2.0 + 0.5 * i}}));
    auto s = f.orch->start_session();
    s = f.orch->submit_message(s.id, "Shift the intro right");
    auto rev0 = f.cell->revision();
    s = f.orch->approve_step(s.id);
    CHECK(s.state == SessionState::AwaitingApproval);
    CHECK(s.steps[0].status == StepStatus::Failed);
    CHECK(s.steps[0].result["code"] == "overlap");
    CHECK(s.consecutive_failures == 1);
    s = f.orch->approve_step(s.id);
    CHECK(s.consecutive_failures == 2);
    s = f.orch->approve_step(s.id);
    CHECK(s.state == SessionState::Failed);
    CHECK(f.cell->revision() == rev0);
    CHECK(event_types(s) == std::vector<std::string>{"plan_proposed", "awaiting_approval", "step_result", "plan_proposed",
                                                     "awaiting_approval", "step_result", "plan_proposed",
                                                     "awaiting_approval", "step_result", "failed"});
    CHECK(s.events.back().payload["reason"] == "failure_budget");

    auto log = f.chat_log();
    REQUIRE(log.size() == 3);
    for (const auto& e : log) CHECK_FALSE(e.ok);
    check_approval_gate(s, log);
    CHECK(f.mock->calls().size() == 3);
    CHECK(code_of([&] { f.orch->submit_message(s.id, "again"); }) == ErrorCode::WrongState);
    CHECK(f.proposed_violations.empty());
}

TEST_CASE("a failure followed by success resets the budget") {
    Fixture f;
    f.script({call("update_clip", {{"id", f.c1.value}, {"start", 2.0}}), call("update_clip", {{"id", f.c1.value}, {"start", 8.0}}),
              say("Moved.")});
    auto s = f.orch->start_session(true);
    s = f.orch->submit_message(s.id, "Move the intro");
    CHECK(s.state == SessionState::Done);
    CHECK(s.steps[0].status == StepStatus::Failed);
    CHECK(s.steps[1].status == StepStatus::Executed);
    CHECK(s.consecutive_failures == 0);
    // The planner saw the overlap error.
    auto calls = f.mock->calls();
    CHECK(calls[1].request.context.dialog.back()["error"]["code"] == "overlap");
}

TEST_CASE("modify re-validates arguments") {
    Fixture f;
    f.script({call("update_clip", {{"id", f.c1.value}, {"start", 10.0}}), say("ok")});
    auto s = f.orch->start_session();
    s = f.orch->submit_message(s.id, "Move the intro");
    CHECK(code_of([&] { f.orch->modify_step(s.id, {{"id", f.c1.value}, {"start", "late"}}); }) == ErrorCode::SchemaViolation);
    s = f.orch->session(s.id);
    CHECK(s.state == SessionState::AwaitingApproval);
    CHECK(s.proposed_step()->args["start"] == 10.0);

    s = f.orch->modify_step(s.id, {{"id", f.c1.value}, {"start", 12.0}});
    CHECK(s.state == SessionState::Done);
    CHECK(s.steps[0].approval == Approval::UserModified);
    CHECK(s.steps[0].args["start"] == 12.0);
    CHECK(f.cell->read([&](const Project& p) { return p.clip(f.c1).start; }) == TimeMs{12000});
    check_approval_gate(s, f.chat_log());
}

TEST_CASE("state machine rejects out-of-order calls") {
    Fixture f;
    auto s = f.orch->start_session();
    CHECK(code_of([&] { f.orch->approve_step(s.id); }) == ErrorCode::WrongState);
    CHECK(code_of([&] { f.orch->modify_step(s.id, json::object()); }) == ErrorCode::WrongState);
    CHECK(code_of([&] { f.orch->reject_step(s.id); }) == ErrorCode::WrongState);
    CHECK(code_of([&] { f.orch->answer_prompt(s.id, "x"); }) == ErrorCode::WrongState);

    f.script({call("update_clip", {{"id", f.c1.value}, {"start", 10.0}})});
    s = f.orch->submit_message(s.id, "Move");
    CHECK(code_of([&] { f.orch->submit_message(s.id, "another"); }) == ErrorCode::WrongState);
    CHECK(code_of([&] { f.orch->answer_prompt(s.id, "x"); }) == ErrorCode::WrongState);
}

TEST_CASE("provider errors fail the session with a transcript note") {
    Fixture f;
    f.script({{{"type", "error"}, {"kind", "timeout"}}});
    auto s = f.orch->start_session();
    s = f.orch->submit_message(s.id, "Do something");
    CHECK(s.state == SessionState::Failed);
    CHECK(s.messages.back()["role"] == "system");
    CHECK(s.messages.back()["text"].get<std::string>().find("Provider error") == 0);
    CHECK(s.events.back().type == "failed");
    CHECK(s.events.back().payload["error"]["detail"]["kind"] == "timeout");

    // A tool call for a tool that was not offered is malformed output.
    Fixture g;
    g.script({call("explode_clip", {{"id", g.c1.value}})});
    auto t = g.orch->start_session();
    t = g.orch->submit_message(t.id, "Explode it");
    CHECK(t.state == SessionState::Failed);
    CHECK(t.events.back().payload["error"]["detail"]["kind"] == "malformed_output");
    CHECK(g.chat_log().empty());
}

TEST_CASE("parameter form and upload prompts") {
    Fixture f;
    f.script({{{"type", "clarify"}, {"question", "How fast?"}, {"needed", "parameters"}, {"target_class", "bounce"}},
              call("create_bounce", {{"clip_id", f.c1.value}, {"speed", 3.0}}), say("ok")});
    auto s = f.orch->start_session(true);
    s = f.orch->submit_message(s.id, "Bounce the intro");
    REQUIRE(s.state == SessionState::AwaitingPromptAnswer);
    const UIPrompt& form = *s.pending_prompt;
    CHECK(form.kind == PromptKind::ParameterForm);
    CHECK(form.payload["fields"] == f.registry.reflect_schema("bounce"));
    CHECK(code_of([&] { f.orch->answer_prompt(s.id, {{"speed", 99.0}}); }) == ErrorCode::InvalidAnswer);
    CHECK(detail_of([&] { f.orch->answer_prompt(s.id, {{"speed", 99.0}}); })["field"] == "speed");
    CHECK(code_of([&] { f.orch->answer_prompt(s.id, {{"wobble", 1}}); }) == ErrorCode::InvalidAnswer);
    CHECK(code_of([&] { f.orch->answer_prompt(s.id, json::object()); }) == ErrorCode::InvalidAnswer);
    s = f.orch->answer_prompt(s.id, {{"speed", 3.0}});
    CHECK(s.state == SessionState::Done);

    Fixture g;
    g.script({{{"type", "clarify"}, {"question", "Which picture?"}, {"needed", "upload"}}, say("Thanks.")});
    auto u = g.orch->start_session();
    u = g.orch->submit_message(u.id, "Put my logo in");
    REQUIRE(u.pending_prompt);
    CHECK(u.pending_prompt->kind == PromptKind::UploadButton);
    CHECK(u.pending_prompt->payload["accepted_kinds"] == json({"image", "audio", "video"}));
    CHECK(code_of([&] { g.orch->answer_prompt(u.id, "asset_00000000"); }) == ErrorCode::InvalidAnswer);
    u = g.orch->answer_prompt(u.id, {{"asset_id", g.asset.value}});
    CHECK(u.state == SessionState::Done);

    // A parameter clarification naming an unknown class is malformed.
    Fixture h;
    h.script({{{"type", "clarify"}, {"question", "?"}, {"needed", "parameters"}, {"target_class", "warp"}}});
    auto w = h.orch->start_session();
    CHECK(h.orch->submit_message(w.id, "warp it").state == SessionState::Failed);
}

TEST_CASE("prompts stay mandatory under auto-skip") {
    Fixture f;
    f.script({{{"type", "clarify"}, {"question", "Which?"}, {"candidates", {f.c1.value, f.c2.value}}}});
    auto s = f.orch->start_session(true);
    s = f.orch->submit_message(s.id, "Bounce it");
    CHECK(s.state == SessionState::AwaitingPromptAnswer);
}

TEST_CASE("references in messages") {
    Fixture f;
    Project p = *f.cell->snapshot();
    std::string text = "move @{clip:" + f.c1.value + "} after @{track:" + f.track.value + "} and @{clip:clip_zzzzzzzz}";
    auto tokens = resolve_references(text, p);
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0].resolved);
    CHECK(tokens[0].id == f.c1);
    CHECK(tokens[0].offset == 5);
    CHECK(tokens[1].resolved);
    CHECK(tokens[1].kind == "track");
    CHECK_FALSE(tokens[2].resolved);
    CHECK(tokens[2].raw == "@{clip:clip_zzzzzzzz}");

    CHECK(resolve_references("email me @ noon", p).empty());
    CHECK(resolve_references("broken @{clip:" + f.c1.value + " and @{}", p).empty());
    CHECK(resolve_references("@{widget:abc}", p).empty());
    // Kind must match the id prefix.
    auto wrong = resolve_references("@{track:" + f.c1.value + "}", p);
    REQUIRE(wrong.size() == 1);
    CHECK_FALSE(wrong[0].resolved);

    f.script({call("query_clip", {{"id", f.c1.value}}), say("ok")});
    auto s = f.orch->start_session();
    CHECK(code_of([&] { f.orch->submit_message(s.id, text); }) == ErrorCode::DanglingReference);
    CHECK(detail_of([&] { f.orch->submit_message(s.id, text); })["token"] == "@{clip:clip_zzzzzzzz}");
    CHECK(code_of([&] { f.orch->submit_message(s.id, "hi", {ObjectId("asset_00000000")}); }) ==
          ErrorCode::DanglingReference);
    CHECK(f.orch->session(s.id).state == SessionState::Idle);
    CHECK(f.orch->session(s.id).messages.empty());

    s = f.orch->submit_message(s.id, "what is @{clip:" + f.c1.value + "}?", {f.asset});
    CHECK(s.state == SessionState::Done);
    const json& first = s.messages[0];
    CHECK(first["references"][0]["id"] == f.c1.value);
    CHECK(first["attachments"][0]["id"] == f.asset.value);
    CHECK(f.mock->calls()[0].request.context.dialog[0]["references"][0]["id"] == f.c1.value);
}

TEST_CASE("a second message during a running pipeline is busy") {
    struct Gate : Provider {
        std::mutex m;
        std::condition_variable cv;
        bool entered = false, release = false;
        ProviderResponse complete(const ProviderRequest&, const json&) override {
            std::unique_lock lock(m);
            entered = true;
            cv.notify_all();
            cv.wait(lock, [&] { return release; });
            return AssistantText{"done"};
        }
    };
    Fixture f;
    auto gate = std::make_shared<Gate>();
    ChatOrchestrator orch(*f.cell, f.dispatcher, std::make_shared<Gateway>(gate));
    auto s = orch.start_session();
    std::thread worker([&] { orch.submit_message(s.id, "first"); });
    {
        std::unique_lock lock(gate->m);
        gate->cv.wait(lock, [&] { return gate->entered; });
    }
    CHECK(orch.session(s.id).state == SessionState::Planning);
    CHECK(code_of([&] { orch.submit_message(s.id, "second"); }) == ErrorCode::SessionBusy);
    CHECK(code_of([&] { orch.approve_step(s.id); }) == ErrorCode::SessionBusy);
    // Other sessions are unaffected.
    auto other = orch.start_session();
    CHECK(other.state == SessionState::Idle);
    {
        std::lock_guard lock(gate->m);
        gate->release = true;
    }
    gate->cv.notify_all();
    worker.join();
    CHECK(orch.session(s.id).state == SessionState::Done);
}

TEST_CASE("session persistence round trip") {
    Fixture f;
    f.script({{{"type", "clarify"}, {"question", "Which clip?"}, {"candidates", {f.c1.value, f.c2.value}}},
              call("update_clip", {{"id", f.c1.value}, {"start", 10.0}})});
    auto s = f.orch->start_session();
    s = f.orch->submit_message(s.id, "move it");
    s = f.orch->answer_prompt(s.id, f.c1.value);
    REQUIRE(s.state == SessionState::AwaitingApproval);

    json doc = session_to_json(s);
    ChatSession back = session_from_json(json::parse(doc.dump()));
    CHECK(back == s);
    CHECK(session_to_json(back) == doc);

    ChatSession interrupted = back;
    interrupted.state = SessionState::Executing;
    ChatOrchestrator fresh(*f.cell, f.dispatcher, std::make_shared<Gateway>(f.mock));
    fresh.restore({back});
    CHECK(fresh.session(s.id) == s);
    ChatOrchestrator fresh2(*f.cell, f.dispatcher, std::make_shared<Gateway>(f.mock));
    fresh2.restore({interrupted});
    CHECK(fresh2.session(s.id).state == SessionState::Idle);
    CHECK(fresh2.session(s.id).messages.back()["role"] == "system");
    // Restored ids are never reissued.
    auto n = fresh.start_session();
    CHECK(n.id != s.id);

    fresh.approve_step(s.id);
    CHECK(code_of([&] { session_from_json({{"id", "sess_00000000"}, {"state", "dreaming"}}); }) ==
          ErrorCode::CorruptDocument);
}

TEST_CASE("instruction suggestions follow the rule table") {
    Project empty = make_project(5);
    auto first = suggest_instructions(empty);
    CHECK(first == suggest_instructions(empty));
    CHECK(std::find(first.begin(), first.end(), "Create a draft from the script") != first.end());

    Fixture f;
    Project p = *f.cell->snapshot();
    auto list = suggest_instructions(p);
    REQUIRE_FALSE(list.empty());
    CHECK(list.size() <= kMaxInstructionSuggestions);
    for (const auto& s : list) CHECK(utf8::length(s) <= kMaxInstructionChars);
    CHECK(list == std::vector<std::string>{"Add entrance animations to the 3 lines without one",
                                           "Place the uploaded media on the timeline",
                                           "Make the line \"Hurry, big sale today!\" stand out"});
    CHECK(list == suggest_instructions(p));

    // LLM mode keeps valid items and falls back on failure.
    auto mock = std::make_shared<MockProvider>(std::vector<json>{
        {{"type", "structured"}, {"document", {{"suggestions", {"Try a slower fade", 4, std::string(200, 'x')}}}}},
        {{"type", "error"}, {"kind", "network"}},
        {{"type", "structured"}, {"document", {{"suggestions", json::array()}}}}});
    Gateway gw(mock);
    CHECK(suggest_instructions(p, AgentMode::Llm, &gw) == std::vector<std::string>{"Try a slower fade"});
    CHECK(suggest_instructions(p, AgentMode::Llm, &gw) == list);
    CHECK(suggest_instructions(p, AgentMode::Llm, &gw) == list);
    CHECK(mock->calls()[0].request.template_id == TemplateId::InstructionSuggestions);
}
