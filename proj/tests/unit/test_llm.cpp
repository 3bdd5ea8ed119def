#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <regex>
#include <thread>

#include "support/test_util.hpp"
#include "tae/llm/gateway.hpp"
#include "tae/timeline/presets.hpp"
#include "tae/timeline/timeline.hpp"

using namespace tae;
using tae::testing::code_of;
using tae::testing::detail_of;

namespace {

struct Fixture {
    MetaRegistry registry = make_builtin_registry();
    std::vector<ToolDescriptor> tools = derive_tools(registry);
    Project project = make_project(11);
    Track track;
    std::vector<Clip> clips;

    Fixture() {
        track = add_track(project, TrackKind::Text, "Titles");
        for (int i = 0; i < 3; ++i) {
            clips.push_back(add_clip(project, track.id, TimeMs{i * 2000}, TimeMs{2000},
                                     TextPayload{"line " + std::to_string(i), {}}));
        }
    }

    ProviderRequest chat_request() const {
        ProviderRequest r;
        r.template_id = TemplateId::IntentComprehension;
        r.context = build_context(project);
        r.tools = tools;
        return r;
    }
};

std::string user_message(const json& prompt) { return prompt["messages"][1]["content"].get<std::string>(); }

std::size_t count_matches(const std::string& text, const std::regex& re) {
    return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

}  // namespace

TEST_CASE("mock returns scripted responses in order, then fails") {
    Fixture f;
    ToolCall call{"update_clip", {{"id", f.clips[0].id.value}, {"start", 0.5}}};
    auto mock = std::make_shared<MockProvider>(std::vector<ProviderResponse>{call, AssistantText{"done"}});
    Gateway gw(mock);

    auto first = gw.complete(f.chat_request());
    CHECK(std::get<ToolCall>(first) == call);
    auto second = gw.complete(f.chat_request());
    CHECK(std::get<AssistantText>(second).text == "done");
    CHECK(code_of([&] { gw.complete(f.chat_request()); }) == ErrorCode::ProviderError);

    auto calls = mock->calls();
    REQUIRE(calls.size() == 3);
    CHECK(calls[0].prompt == assemble_prompt(TemplateId::IntentComprehension, f.chat_request().context));
    CHECK(user_message(calls[0].prompt).find("line 1") != std::string::npos);
}

TEST_CASE("tool calls outside the offered set or schema are malformed") {
    Fixture f;
    auto mock = std::make_shared<MockProvider>(std::vector<json>{
        {{"type", "tool_call"}, {"name", "explode_clip"}, {"args", json::object()}},
        {{"type", "tool_call"}, {"name", "update_clip"}, {"args", {{"id", f.clips[0].id.value}, {"font_size", 5000}}}},
        {{"type", "tool_call"}, {"name", "update_clip"}, {"args", {{"start", 1.0}}}},
        {{"type", "bogus"}},
        {{"type", "error"}, {"kind", "timeout"}},
    });
    Gateway gw(mock);
    for (const char* kind : {"malformed_output", "malformed_output", "malformed_output", "malformed_output", "timeout"}) {
        json d = detail_of([&] { gw.complete(f.chat_request()); });
        CHECK(d.value("kind", "") == kind);
    }
}

TEST_CASE("clarify candidates must be live objects") {
    Fixture f;
    Clarify ok{"Which clip?", {f.clips[0].id, f.clips[1].id, f.clips[2].id}, ClarifyNeed::Selection, std::nullopt};
    Clarify dangling{"Which clip?", {ObjectId("clip_zzzzzzzz")}, ClarifyNeed::Selection, std::nullopt};
    Clarify empty{"Which clip?", {}, ClarifyNeed::Selection, std::nullopt};
    Clarify form{"Which size?", {}, ClarifyNeed::Parameters, std::string("clip")};
    auto mock = std::make_shared<MockProvider>(std::vector<ProviderResponse>{ok, dangling, empty, form});
    Gateway gw(mock);
    CHECK(std::get<Clarify>(gw.complete(f.chat_request())) == ok);
    CHECK(code_of([&] { gw.complete(f.chat_request()); }) == ErrorCode::ProviderError);
    CHECK(code_of([&] { gw.complete(f.chat_request()); }) == ErrorCode::ProviderError);
    CHECK(std::get<Clarify>(gw.complete(f.chat_request())) == form);
}

TEST_CASE("constrained strategy output is accepted only inside the enum") {
    Fixture f;
    auto mock = std::make_shared<MockProvider>(std::vector<json>{
        {{"type", "structured"}, {"document", {{"strategy", "parallel_new_track"}, {"reason", "overlay"}}}},
        {{"type", "structured"}, {"document", {{"strategy", "4"}}}},
        {{"type", "structured"}, {"document", {{"reason", "no strategy"}}}},
        {{"type", "assistant_text"}, {"text", "parallel_new_track"}},
    });
    Gateway gw(mock);
    ProviderRequest r;
    r.template_id = TemplateId::ClipStrategy;
    r.context = build_context(f.project);
    r.structured = true;
    r.constraint = OutputConstraint{"strategy", {"sequential_same_track", "parallel_adjusted_timing", "parallel_new_track"}};

    auto first = gw.complete(r);
    CHECK(std::get<Structured>(first).document["strategy"] == "parallel_new_track");
    for (int i = 0; i < 3; ++i) {
        CHECK(detail_of([&] { gw.complete(r); }).value("kind", "") == "malformed_output");
    }
}

TEST_CASE("tools are required exactly for tool-calling templates") {
    Fixture f;
    Gateway gw(std::make_shared<MockProvider>());
    ProviderRequest r = f.chat_request();
    r.tools.clear();
    CHECK(code_of([&] { gw.complete(r); }) == ErrorCode::BadRequest);
    ProviderRequest s;
    s.template_id = TemplateId::TextRefinement;
    s.tools = f.tools;
    CHECK(code_of([&] { gw.complete(s); }) == ErrorCode::BadRequest);
}

TEST_CASE("response wire form round-trips") {
    std::vector<ProviderResponse> all = {
        ToolCall{"query_clip", json::object()},
        AssistantText{"hi"},
        Clarify{"which?", {ObjectId("clip_00000001")}, ClarifyNeed::Selection, std::nullopt},
        Clarify{"upload?", {}, ClarifyNeed::Upload, std::string("asset")},
        Structured{{{"a", 1}}},
    };
    for (const auto& r : all) CHECK(response_from_json(response_to_json(r)) == r);
}

TEST_CASE("prompt assembly is deterministic and sectioned") {
    Fixture f;
    AgentContext ctx = build_context(f.project, json::array({{{"role", "user"}, {"text", "make it pop"}}}));
    for (auto id : {TemplateId::IntentComprehension, TemplateId::SemanticMatching, TemplateId::ElementModification,
                    TemplateId::TextRefinement, TemplateId::ClipStrategy, TemplateId::InstructionSuggestions}) {
        json a = assemble_prompt(id, ctx);
        json b = assemble_prompt(id, ctx);
        CHECK(a == b);
        std::string user = user_message(a);
        for (const char* section : {"## Timeline", "## Script", "## Recent operations", "## Assets", "## Dialog", "## Task"}) {
            CHECK(user.find(section) != std::string::npos);
        }
        bool has_mapping = user.find(kMappingSectionHeader) != std::string::npos;
        CHECK(has_mapping == (id == TemplateId::SemanticMatching));
        CHECK(user.find("make it pop") != std::string::npos);
    }
    CHECK(user_message(assemble_prompt(TemplateId::SemanticMatching, ctx)).find("scale_pop") != std::string::npos);
}

TEST_CASE("prompt keeps exactly the last 20 of 50 log entries") {
    Fixture f;
    f.project.operation_log.clear();
    for (int i = 0; i < 50; ++i) append_log(f.project, Actor::User, "query_clip", json::object(), true, "", 0);
    std::string user = user_message(assemble_prompt(TemplateId::IntentComprehension, build_context(f.project)));
    std::regex op(R"(op#(\d+) )");
    CHECK(count_matches(user, op) == 20);
    std::vector<int> seqs;
    for (auto it = std::sregex_iterator(user.begin(), user.end(), op); it != std::sregex_iterator(); ++it) {
        seqs.push_back(std::stoi((*it)[1]));
    }
    std::vector<int> expected;
    for (int i = 0; i < 20; ++i) expected.push_back(static_cast<int>(f.project.operation_log[30 + i].seq));
    CHECK(seqs == expected);
}

TEST_CASE("script section keeps the newest 4000 code points") {
    Project p = make_project(3);
    Track t = add_track(p, TrackKind::Text, "T");
    // 100 lines of 100 multibyte characters each.
    std::string body;
    for (int i = 0; i < 100; ++i) body += "é";
    std::vector<Clip> clips;
    for (int i = 0; i < 100; ++i) clips.push_back(add_clip(p, t.id, TimeMs{i * 1000}, TimeMs{1000}, TextPayload{body, {}}));
    std::string user = user_message(assemble_prompt(TemplateId::TextRefinement, build_context(p)));
    auto begin = user.find("## Script\n");
    auto end = user.find("## Recent operations");
    std::string script = user.substr(begin, end - begin);
    // Each rendered line is "[clip_xxxxxxxx] " + 100 chars = 116 code points; 34 fit in 4000 with separators.
    CHECK(script.find(clips.back().id.value) != std::string::npos);
    CHECK(script.find(clips.front().id.value) == std::string::npos);
    CHECK(script.find("(66 earlier lines omitted)") != std::string::npos);
}

TEST_CASE("http provider speaks chat completions") {
    Fixture f;
    httplib::Server server;
    json seen_body;
    std::string seen_auth;
    std::string seen_path;
    std::atomic<int> mode{0};
    server.Post(R"(/v1/chat/completions)", [&](const httplib::Request& req, httplib::Response& res) {
        seen_body = json::parse(req.body);
        seen_auth = req.get_header_value("Authorization");
        seen_path = req.path;
        json reply;
        if (mode == 0) {
            json call = {{"type", "function"},
                         {"function", {{"name", "update_clip"}, {"arguments", json({{"id", f.clips[0].id.value}, {"start", 0.25}}).dump()}}}};
            reply = {{"choices", json::array({{{"message", {{"role", "assistant"}, {"tool_calls", json::array({call})}}}}})}};
        } else if (mode == 1) {
            json call = {{"type", "function"},
                         {"function",
                          {{"name", "clarify"},
                           {"arguments", json({{"question", "Which?"}, {"needed", "selection"}, {"candidates", {f.clips[1].id.value}}}).dump()}}}};
            reply = {{"choices", json::array({{{"message", {{"tool_calls", json::array({call})}}}}})}};
        } else if (mode == 2) {
            reply = {{"choices", json::array({{{"message", {{"content", "{\"strategy\":\"parallel_new_track\"}"}}}}})}};
        } else if (mode == 3) {
            res.status = 500;
            return;
        } else {
            std::this_thread::sleep_for(std::chrono::milliseconds(1500));
            reply = {{"choices", json::array()}};
        }
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpProviderConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
    cfg.api_key = "secret";
    cfg.model = "test-model";
    cfg.timeout = std::chrono::milliseconds(500);
    Gateway gw(std::make_shared<HttpProvider>(cfg));

    auto call = std::get<ToolCall>(gw.complete(f.chat_request()));
    CHECK(call.name == "update_clip");
    CHECK(call.args["start"] == 0.25);
    CHECK(seen_path == "/v1/chat/completions");
    CHECK(seen_auth == "Bearer secret");
    CHECK(seen_body["model"] == "test-model");
    CHECK(seen_body["tools"].size() == f.tools.size() + 1);
    CHECK(seen_body["tools"].back()["function"]["name"] == "clarify");
    CHECK(seen_body["messages"] == assemble_prompt(TemplateId::IntentComprehension, f.chat_request().context)["messages"]);

    mode = 1;
    auto clarify = std::get<Clarify>(gw.complete(f.chat_request()));
    CHECK(clarify.candidates == std::vector<ObjectId>{f.clips[1].id});

    mode = 2;
    ProviderRequest r;
    r.template_id = TemplateId::ClipStrategy;
    r.context = build_context(f.project);
    r.structured = true;
    r.constraint = OutputConstraint{"strategy", {"sequential_same_track", "parallel_adjusted_timing", "parallel_new_track"}};
    auto doc = std::get<Structured>(gw.complete(r)).document;
    CHECK(doc["strategy"] == "parallel_new_track");
    CHECK(seen_body["response_format"]["type"] == "json_object");
    CHECK_FALSE(seen_body.contains("tools"));

    mode = 3;
    CHECK(detail_of([&] { gw.complete(f.chat_request()); }).value("kind", "") == "network");
    mode = 4;
    CHECK(detail_of([&] { gw.complete(f.chat_request()); }).value("kind", "") == "timeout");

    server.stop();
    th.join();

    CHECK(detail_of([&] { gw.complete(f.chat_request()); }).value("kind", "") == "network");
}

TEST_CASE("provider config comes from the environment") {
    setenv("TAE_LLM_BASE_URL", "http://localhost:9/v2", 1);
    setenv("TAE_LLM_MODEL", "m", 1);
    setenv("TAE_LLM_TIMEOUT_SECONDS", "2.5", 1);
    auto cfg = HttpProviderConfig::from_env();
    CHECK(cfg.base_url == "http://localhost:9/v2");
    CHECK(cfg.model == "m");
    CHECK(cfg.timeout == std::chrono::milliseconds(2500));
    unsetenv("TAE_LLM_TIMEOUT_SECONDS");
    CHECK(HttpProviderConfig::from_env().timeout == std::chrono::milliseconds(30000));
    setenv("TAE_OFFLINE", "1", 1);
    CHECK(offline_from_env());
    setenv("TAE_OFFLINE", "0", 1);
    CHECK_FALSE(offline_from_env());
    unsetenv("TAE_OFFLINE");
    unsetenv("TAE_LLM_BASE_URL");
    unsetenv("TAE_LLM_MODEL");
}
