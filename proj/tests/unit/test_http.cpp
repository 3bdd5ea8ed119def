#include <doctest.h>
#include <httplib.h>

#include <condition_variable>
#include <filesystem>
#include <set>
#include <thread>

#include "support/test_util.hpp"
#include "tae/service/http_api.hpp"

using namespace tae;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

/// Scripted provider that can be held inside complete() to keep a session busy.
struct HoldableProvider : Provider {
    std::shared_ptr<MockProvider> mock = std::make_shared<MockProvider>();
    std::mutex m;
    std::condition_variable cv;
    bool hold = false, entered = false;

    ProviderResponse complete(const ProviderRequest& request, const json& prompt) override {
        {
            std::unique_lock lock(m);
            if (hold) {
                entered = true;
                cv.notify_all();
                cv.wait(lock, [&] { return !hold; });
            }
        }
        return mock->complete(request, prompt);
    }
    void wait_entered() {
        std::unique_lock lock(m);
        cv.wait(lock, [&] { return entered; });
    }
    void release() {
        std::lock_guard lock(m);
        hold = false;
        cv.notify_all();
    }
};

struct Response {
    int status = 0;
    json body;
};

struct Server {
    fs::path dir;
    std::shared_ptr<HoldableProvider> provider = std::make_shared<HoldableProvider>();
    std::unique_ptr<EditorService> service;
    std::unique_ptr<HttpApi> api;
    std::thread runner;
    int port = -1;

    Server() {
        static std::atomic<int> n{0};
        dir = fs::temp_directory_path() / ("tae_http_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::remove_all(dir);
        ServiceConfig config;
        config.data_dir = dir;
        config.gateway = std::make_shared<Gateway>(provider);
        config.debounce = std::chrono::hours(1);
        config.clock = tae::testing::fixed_clock;
        service = std::make_unique<EditorService>(config);
        api = std::make_unique<HttpApi>(*service);
        port = api->bind("127.0.0.1", 0);
        REQUIRE(port > 0);
        runner = std::thread([this] { api->run(); });
        httplib::Client probe("127.0.0.1", port);
        for (int i = 0; i < 200 && !probe.Get("/api/health"); ++i) std::this_thread::sleep_for(10ms);
    }
    ~Server() {
        api->stop();
        runner.join();
        api.reset();
        service.reset();
        std::error_code ec;
        fs::remove_all(dir, ec);
    }

    Response send(const std::string& method, const std::string& path, const json& body = nullptr) const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30s);
        std::string payload = body.is_null() ? std::string() : body.dump();
        httplib::Result r;
        if (method == "GET") r = c.Get(path);
        if (method == "POST") r = c.Post(path, payload, "application/json");
        if (method == "PUT") r = c.Put(path, payload, "application/json");
        if (method == "PATCH") r = c.Patch(path, payload, "application/json");
        if (method == "DELETE") r = c.Delete(path);
        REQUIRE(r);
        Response out{r->status, nullptr};
        if (!r->body.empty() && r->get_header_value("Content-Type") == "application/json") out.body = json::parse(r->body);
        return out;
    }
    Response raw_post(const std::string& path, const std::string& body, const std::string& type) const {
        httplib::Client c("127.0.0.1", port);
        auto r = c.Post(path, body, type);
        REQUIRE(r);
        return {r->status, json::parse(r->body, nullptr, false)};
    }
};

/// Reads a project's event stream on a background connection.
struct SseReader {
    std::thread thread;
    std::mutex m;
    std::condition_variable cv;
    std::vector<ServerEvent> events;
    std::string buffer;
    std::atomic<bool> stop{false};
    int status = 0;

    SseReader(const Server& server, const ObjectId& pid) {
        std::size_t before = server.service->events().subscribers(pid);
        thread = std::thread([this, port = server.port, path = "/api/projects/" + pid.value + "/events"] {
            httplib::Client c("127.0.0.1", port);
            c.set_read_timeout(30s);
            auto r = c.Get(path, [this](const char* data, std::size_t n) {
                std::lock_guard lock(m);
                buffer.append(data, n);
                parse();
                cv.notify_all();
                return !stop.load();
            });
            std::lock_guard lock(m);
            status = r ? r->status : -1;
        });
        for (int i = 0; i < 500 && server.service->events().subscribers(pid) <= before; ++i) std::this_thread::sleep_for(5ms);
    }
    ~SseReader() {
        stop = true;
        thread.join();
    }

    void parse() {
        std::size_t pos;
        while ((pos = buffer.find("\n\n")) != std::string::npos) {
            std::string block = buffer.substr(0, pos);
            buffer.erase(0, pos + 2);
            ServerEvent ev;
            bool has_event = false;
            std::size_t start = 0;
            while (start <= block.size()) {
                std::size_t end = block.find('\n', start);
                if (end == std::string::npos) end = block.size();
                std::string line = block.substr(start, end - start);
                if (line.rfind("id: ", 0) == 0) ev.seq = std::stoll(line.substr(4));
                if (line.rfind("event: ", 0) == 0) {
                    ev.type = line.substr(7);
                    has_event = true;
                }
                if (line.rfind("data: ", 0) == 0) ev.data = json::parse(line.substr(6));
                start = end + 1;
            }
            if (has_event) events.push_back(ev);
        }
    }

    template <class Pred>
    bool wait_until(Pred pred, std::chrono::milliseconds timeout = 10s) {
        std::unique_lock lock(m);
        return cv.wait_for(lock, timeout, [&] { return pred(events); });
    }
    std::vector<ServerEvent> snapshot() {
        std::lock_guard lock(m);
        return events;
    }
};

std::string base(const ObjectId& pid) { return "/api/projects/" + pid.value; }

ErrorCode code_named(const std::string& name) {
    for (ErrorCode c : all_error_codes()) {
        if (error_code_name(c) == name) return c;
    }
    FAIL("unknown error code name " << name);
    return ErrorCode::Internal;
}

json tool_call(const std::string& tool, json args) { return {{"type", "tool_call"}, {"name", tool}, {"args", std::move(args)}}; }

/// Project with two text tracks, an element track and a few clips.
struct Scene {
    ObjectId pid, t1, t2, elem, c1, c2, c3, e1;

    explicit Scene(const Server& s) {
        Response r = s.send("POST", "/api/projects", {{"seed", 21}});
        REQUIRE(r.status == 201);
        pid = ObjectId(r.body["project"]["id"].get<std::string>());
        t1 = id(s.send("POST", base(pid) + "/tracks", {{"name", "Lines"}, {"order_index", 0}}));
        t2 = id(s.send("POST", base(pid) + "/tracks", {{"name", "Notes"}, {"order_index", 1}}));
        elem = id(s.send("POST", base(pid) + "/tracks", {{"name", "Shapes"}, {"kind", "element"}, {"order_index", 2}}));
        c1 = clip(s, t1, "Hello world", 0.0);
        c2 = clip(s, t1, "Second line", 2.0);
        c3 = clip(s, t2, "Side note", 0.0);
        e1 = id(s.send("POST", base(pid) + "/clips", {{"track_id", elem.value}, {"start", 0.0}}));
    }
    static ObjectId id(const Response& r) {
        REQUIRE(r.status / 100 == 2);
        return ObjectId(r.body["id"].get<std::string>());
    }
    ObjectId clip(const Server& s, const ObjectId& track, const std::string& text, double start) const {
        return id(s.send("POST", base(pid) + "/clips", {{"track_id", track.value}, {"content", text}, {"start", start}}));
    }
};

std::vector<std::string> chat_types(const std::vector<ServerEvent>& events, const std::string& session) {
    std::vector<std::string> out;
    for (const auto& e : events) {
        if (e.type == "chat" && e.data["session_id"] == session) out.push_back(e.data["event"]["type"].get<std::string>());
    }
    return out;
}

std::size_t count_completed(const std::vector<ServerEvent>& events) {
    std::size_t n = 0;
    for (const auto& e : events) {
        if (e.type == "chat" && (e.data["event"]["type"] == "completed" || e.data["event"]["type"] == "failed")) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("catalog endpoints describe tools, classes and error codes") {
    Server s;
    Response tools = s.send("GET", "/api/tools");
    CHECK(tools.status == 200);
    CHECK(tools.body.size() == s.service->dispatcher().tools().size());
    Response schema = s.send("GET", "/api/classes/bounce/schema");
    CHECK(schema.status == 200);
    CHECK(schema.body.dump().find("speed") != std::string::npos);
    Response codes = s.send("GET", "/api/error_codes");
    CHECK(codes.body.size() == all_error_codes().size());
    CHECK(s.send("GET", "/api/presets").body.size() == 8);
    Response missing = s.send("GET", "/api/nowhere");
    CHECK(missing.status == 404);
    CHECK(missing.body["code"] == "bad_request");
}

TEST_CASE("posting an overlapping clip is a 409 overlap") {
    Server s;
    Scene sc(s);
    Response r = s.send("POST", base(sc.pid) + "/clips", {{"track_id", sc.t1.value}, {"content", "x"}, {"start", 1.0}});
    CHECK(r.status == 409);
    CHECK(r.body["code"] == "overlap");
    CHECK(r.body["message"].is_string());
    CHECK(r.body["detail"].is_object());
}

TEST_CASE("a frame of a project without clips is empty") {
    Server s;
    Response p = s.send("POST", "/api/projects", json::object());
    ObjectId pid(p.body["project"]["id"].get<std::string>());
    Response f = s.send("GET", base(pid) + "/frame?t=1.5");
    CHECK(f.status == 200);
    CHECK(f.body["states"] == json::array());
    CHECK(s.send("GET", base(pid) + "/frame?t=abc").status == 400);
}

TEST_CASE("timeline, script and animation endpoints round-trip") {
    Server s;
    Scene sc(s);
    Response anim = s.send("POST", base(sc.pid) + "/clips/" + sc.c1.value + "/animations",
                           {{"preset", "fade_in"}, {"params", {{"duration", 0.4}}}});
    REQUIRE(anim.status == 201);
    std::string aid = anim.body["id"];
    CHECK(s.send("PATCH", base(sc.pid) + "/animations/" + aid, {{"params", {{"duration", 0.8}}}}).status == 200);
    Response frame = s.send("GET", base(sc.pid) + "/frame?t=0.4");
    REQUIRE(frame.status == 200);
    for (const auto& st : frame.body["states"]) {
        if (st["clip_id"] == sc.c1.value) CHECK(st["opacity"].get<double>() < 1.0);
    }
    CHECK(s.send("DELETE", base(sc.pid) + "/animations/" + aid).status == 204);

    Response split = s.send("POST", base(sc.pid) + "/script/split", {{"clip_id", sc.c1.value}, {"offset", 5}});
    REQUIRE(split.status == 200);
    std::string second = split.body["second"]["id"];
    Response script = s.send("GET", base(sc.pid) + "/script?tracks=" + sc.t1.value);
    REQUIRE(script.status == 200);
    CHECK(script.body["lines"].size() == 3);
    Response merged = s.send("POST", base(sc.pid) + "/script/merge", {{"a", sc.c1.value}, {"b", second}});
    CHECK(merged.status == 200);
    CHECK(merged.body["payload"]["content"] == "Hello world");

    Response added = s.send("POST", base(sc.pid) + "/script/lines",
                            {{"anchor", {{"position", "after"}, {"line_index", 0}}},
                             {"text", "Inserted"},
                             {"strategy", "sequential_same_track"},
                             {"tracks", {sc.t1.value}}});
    CHECK(added.status == 201);
    CHECK(added.body["decided_by"] == "user");
    Response styled = s.send("POST", base(sc.pid) + "/script/style",
                             {{"begin", 0}, {"count", 2}, {"style", {{"font_size", 64}}}, {"tracks", {sc.t1.value}}});
    CHECK(styled.body["updated"] == 2);
    Response tracks = s.send("PUT", base(sc.pid) + "/script/tracks", {{"track_ids", {sc.t2.value}}});
    CHECK(tracks.status == 200);
    CHECK(tracks.body["lines"].size() == 1);
    Response log = s.send("GET", base(sc.pid) + "/log");
    CHECK(log.body.back()["tool"] == "set_script_tracks");
    CHECK(s.send("DELETE", base(sc.pid) + "/clips/" + sc.c3.value).status == 204);
    CHECK(s.send("GET", base(sc.pid) + "/clips/" + sc.c3.value).status == 404);
}

TEST_CASE("multipart upload stores the bytes and announces the asset") {
    Server s;
    Scene sc(s);
    SseReader sse(s, sc.pid);
    httplib::Client c("127.0.0.1", s.port);
    std::string bytes("\x89PNG\r\n\x1a\n\0\x01", 10);
    httplib::MultipartFormDataItems items = {{"file", bytes, "logo.png", "image/png"}};
    auto r = c.Post(base(sc.pid) + "/assets", items);
    REQUIRE(r);
    CHECK(r->status == 201);
    json asset = json::parse(r->body);
    CHECK(asset["kind"] == "image");
    auto dl = c.Get(base(sc.pid) + "/assets/" + asset["id"].get<std::string>());
    REQUIRE(dl);
    CHECK(dl->body == bytes);

    httplib::MultipartFormDataItems video = {{"file", "vv", "clip.mp4", "video/mp4"}, {"duration", "2.5", "", ""}};
    auto v = c.Post(base(sc.pid) + "/assets", video);
    REQUIRE(v);
    CHECK(v->status == 201);
    CHECK(json::parse(v->body)["media_duration"] == 2.5);

    auto bad = c.Post(base(sc.pid) + "/assets", R"({"file":"x"})", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(s.send("GET", base(sc.pid) + "/assets").body.size() == 2);
    CHECK(sse.wait_until([](const auto& evs) {
        return std::count_if(evs.begin(), evs.end(), [](const ServerEvent& e) { return e.type == "asset"; }) == 2;
    }));
}

TEST_CASE("scripted chat over HTTP streams the orchestrator's event sequence") {
    Server s;
    Scene sc(s);
    SseReader sse(s, sc.pid);
    s.provider->mock->push({{"type", "clarify"},
                            {"question", "Which line?"},
                            {"needed", "selection"},
                            {"candidates", {sc.c1.value, sc.c2.value}}});
    s.provider->mock->push(tool_call("update_clip", {{"id", sc.c2.value}, {"content", "Second line!"}}));
    s.provider->mock->push({{"type", "assistant_text"}, {"text", "Updated."}});

    Response started = s.send("POST", base(sc.pid) + "/chat/sessions", json::object());
    REQUIRE(started.status == 201);
    std::string sid = started.body["id"];
    std::string sp = base(sc.pid) + "/chat/sessions/" + sid;

    Response sent = s.send("POST", sp + "/messages", {{"text", "Punch up @{clip:" + sc.c2.value + "}"}});
    REQUIRE(sent.status == 200);
    CHECK(sent.body["state"] == "awaiting_prompt_answer");
    CHECK(s.send("POST", sp + "/approve").status == 409);
    Response wrong = s.send("POST", sp + "/answer", {{"answer", sc.t1.value}});
    CHECK(wrong.status == 400);
    CHECK(wrong.body["code"] == "invalid_answer");

    Response answered = s.send("POST", sp + "/answer", {{"answer", sc.c2.value}});
    REQUIRE(answered.status == 200);
    CHECK(answered.body["state"] == "awaiting_approval");
    std::int64_t rev_before = s.send("GET", base(sc.pid)).body["project"]["revision"];
    Response approved = s.send("POST", sp + "/approve");
    REQUIRE(approved.status == 200);
    CHECK(approved.body["state"] == "done");

    std::vector<std::string> expected = {"prompt",      "plan_proposed",  "awaiting_approval",
                                         "step_result", "assistant_text", "completed"};
    REQUIRE(sse.wait_until([&](const auto& evs) { return chat_types(evs, sid).size() >= expected.size(); }));
    auto events = sse.snapshot();
    CHECK(chat_types(events, sid) == expected);

    // The stream carries exactly the session's own events, in order.
    Response history = s.send("GET", sp + "/events");
    std::vector<json> streamed;
    for (const auto& e : events) {
        if (e.type == "chat") streamed.push_back(e.data["event"]);
    }
    REQUIRE(streamed.size() == history.body.size());
    for (std::size_t i = 0; i < streamed.size(); ++i) {
        CHECK(streamed[i] == history.body[i]);
        CHECK(streamed[i]["seq"] == static_cast<std::int64_t>(i + 1));
    }
    CHECK(s.send("GET", sp + "/events?after=4").body.size() == 2);

    // Server sequence numbers are gap free, and the edit is announced as a revision after its result.
    for (std::size_t i = 1; i < events.size(); ++i) CHECK(events[i].seq == events[i - 1].seq + 1);
    auto result_at = std::find_if(events.begin(), events.end(), [](const ServerEvent& e) {
        return e.type == "chat" && e.data["event"]["type"] == "step_result";
    });
    auto revision_at = std::find_if(events.begin(), events.end(), [&](const ServerEvent& e) {
        return e.type == "revision" && e.data["revision"] == rev_before + 1;
    });
    CHECK(result_at < revision_at);
    CHECK(revision_at != events.end());

    Response log = s.send("GET", base(sc.pid) + "/log");
    json last = log.body.back();
    CHECK(last["actor"] == "chat_agent");
    CHECK(last["tool"] == "update_clip");
    CHECK(s.send("GET", base(sc.pid) + "/clips/" + sc.c2.value).body["payload"]["content"] == "Second line!");
}

TEST_CASE("reject and auto-skip over HTTP") {
    Server s;
    Scene sc(s);
    s.provider->mock->push(tool_call("delete_clip", {{"id", sc.c1.value}}));
    s.provider->mock->push({{"type", "assistant_text"}, {"text", "Kept it."}});
    std::string sid = s.send("POST", base(sc.pid) + "/chat/sessions", json::object()).body["id"];
    std::string sp = base(sc.pid) + "/chat/sessions/" + sid;
    s.send("POST", sp + "/messages", {{"text", "Remove the first line"}});
    Response rejected = s.send("POST", sp + "/reject", {{"feedback", "keep it"}});
    REQUIRE(rejected.status == 200);
    CHECK(rejected.body["state"] == "done");
    CHECK(s.send("GET", base(sc.pid) + "/clips/" + sc.c1.value).status == 200);
    auto calls = s.provider->mock->calls();
    REQUIRE(calls.size() == 2);
    CHECK(calls[1].prompt.dump().find("keep it") != std::string::npos);

    Response skip = s.send("PUT", sp + "/auto_skip", {{"auto_skip", true}});
    CHECK(skip.body["auto_skip"] == true);
    s.provider->mock->push(tool_call("update_clip", {{"id", sc.c1.value}, {"content", "Hi world"}}));
    s.provider->mock->push({{"type", "assistant_text"}, {"text", "Done."}});
    Response ran = s.send("POST", sp + "/messages", {{"text", "Shorten the first line"}});
    CHECK(ran.body["state"] == "done");
    CHECK(s.send("GET", base(sc.pid) + "/clips/" + sc.c1.value).body["payload"]["content"] == "Hi world");
    CHECK(s.send("GET", base(sc.pid) + "/chat/sessions").body.size() == 1);
    Response ins = s.send("GET", base(sc.pid) + "/chat/instructions");
    CHECK(ins.status == 200);
    CHECK_FALSE(ins.body["suggestions"].empty());
}

TEST_CASE("suggestion endpoints over HTTP") {
    Server s;
    Scene sc(s);
    SseReader sse(s, sc.pid);
    s.send("POST", base(sc.pid) + "/script/edit", {{"clip_id", sc.c2.value}, {"text", "Hurry,   big sale today!"}});
    Response refreshed = s.send("POST", base(sc.pid) + "/suggestions/refresh");
    REQUIRE(refreshed.status == 200);
    std::int64_t rev = refreshed.body["revision"];
    json revision, recommendation;
    for (const auto& p : refreshed.body["suggestions"]) {
        if (p["target"]["clip_id"] != sc.c2.value) continue;
        (p["kind"] == "text_revision" ? revision : recommendation) = p;
    }
    REQUIRE(revision.is_object());
    REQUIRE(recommendation.is_object());
    std::string rp = base(sc.pid) + "/suggestions/";
    Response accepted = s.send("POST", rp + recommendation["id"].get<std::string>() + "/accept", {{"revision", rev}});
    REQUIRE(accepted.status == 200);
    CHECK(accepted.body["result"]["preset"] == recommendation["action"]["preset"]);
    Response log = s.send("GET", base(sc.pid) + "/log");
    CHECK(log.body.back()["actor"] == "inline_agent");
    CHECK(log.body.back()["tool"] == "create_" + recommendation["action"]["preset"].get<std::string>());
    CHECK(s.send("POST", rp + revision["id"].get<std::string>() + "/dismiss").status == 200);
    CHECK(s.send("GET", base(sc.pid) + "/suggestions").body["suggestions"].size() + 2 ==
          refreshed.body["suggestions"].size());
    CHECK(sse.wait_until([](const auto& evs) {
        return std::any_of(evs.begin(), evs.end(), [](const ServerEvent& e) { return e.type == "suggestion_accepted"; }) &&
               std::any_of(evs.begin(), evs.end(), [](const ServerEvent& e) { return e.type == "suggestion_dismissed"; });
    }));
}

TEST_CASE("concurrent HTTP mutations apply in a total order") {
    Server s;
    Scene sc(s);
    std::int64_t rev0 = s.send("GET", base(sc.pid)).body["project"]["revision"];
    constexpr int kThreads = 8, kEach = 10;
    std::atomic<int> created{0}, conflicts{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < kThreads; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < kEach; ++i) {
                double start = 10.0 + 3.0 * (t * kEach + i);
                Response r = s.send("POST", base(sc.pid) + "/clips", {{"track_id", sc.t2.value}, {"start", start}});
                if (r.status == 201) ++created;
            }
            Response r = s.send("POST", base(sc.pid) + "/clips", {{"track_id", sc.t2.value}, {"start", 5.0}});
            if (r.status == 409) ++conflicts;
        });
    }
    for (auto& th : threads) th.join();
    json doc = s.send("GET", base(sc.pid)).body["project"];
    CHECK(created == kThreads * kEach);
    CHECK(conflicts == kThreads - 1);
    CHECK(doc["revision"] == rev0 + kThreads * kEach + 1);
    ProjectStore store(s.dir);
    CHECK(serialize_project(store.load(sc.pid).project)["project"] == doc);
}

TEST_CASE("every error code has a distinct name and an error status") {
    std::set<std::string> names;
    for (ErrorCode c : all_error_codes()) {
        names.insert(std::string(error_code_name(c)));
        CHECK(http_status(c) >= 400);
        CHECK(http_status(c) < 600);
    }
    CHECK(names.size() == all_error_codes().size());
    CHECK(http_status(ErrorCode::Overlap) == 409);
    CHECK(http_status(ErrorCode::UnknownClip) == 404);
    CHECK(http_status(ErrorCode::ProviderError) == 502);
    CHECK(http_status(ErrorCode::Internal) == 500);
    CHECK(http_status(ErrorCode::SchemaViolation) == 400);
}

TEST_CASE("module error cases are reachable over the API") {
    Server s;
    Scene sc(s);
    std::string p = base(sc.pid);
    std::map<ErrorCode, std::string> reached;

    auto expect = [&](ErrorCode code, const Response& r, const std::string& what) {
        INFO(what << " -> " << r.status << " " << r.body.dump());
        REQUIRE(r.body.is_object());
        REQUIRE(r.body.contains("code"));
        CHECK(r.body["code"] == std::string(error_code_name(code)));
        CHECK(r.status == http_status(code));
        CHECK(r.body["message"].is_string());
        reached[code_named(r.body["code"])] = what;
    };

    json doc = s.send("GET", p).body;
    expect(ErrorCode::BadRequest, s.raw_post("/api/projects", "{nope", "application/json"), "malformed body");
    expect(ErrorCode::UnknownProject, s.send("GET", "/api/projects/proj_zzzzzzzz"), "missing project");
    expect(ErrorCode::UnknownClass, s.send("GET", "/api/classes/wobble/schema"), "missing class");
    expect(ErrorCode::UnknownTool, s.send("POST", p + "/tools/teleport_clip", json::object()), "missing tool");
    expect(ErrorCode::SchemaViolation,
           s.send("POST", p + "/clips", {{"track_id", sc.t1.value}, {"start", "soon"}}), "bad argument type");
    expect(ErrorCode::Overlap, s.send("POST", p + "/clips", {{"track_id", sc.t1.value}, {"start", 1.0}}), "overlap");
    expect(ErrorCode::UnknownTrack, s.send("DELETE", p + "/tracks/track_zzzzzzzz"), "missing track");
    expect(ErrorCode::UnknownClip, s.send("GET", p + "/clips/clip_zzzzzzzz"), "missing clip");
    expect(ErrorCode::UnknownAnimation, s.send("PATCH", p + "/animations/anim_zzzzzzzz", json::object()),
           "missing animation");
    expect(ErrorCode::UnknownAsset, s.send("GET", p + "/assets/asset_zzzzzzzz"), "missing asset");
    expect(ErrorCode::UnknownPreset, s.send("POST", p + "/clips/" + sc.c1.value + "/animations", {{"preset", "wobble"}}),
           "missing preset");
    expect(ErrorCode::UnknownSession, s.send("GET", p + "/chat/sessions/sess_zzzzzzzz"), "missing session");
    expect(ErrorCode::UnknownSuggestion, s.send("POST", p + "/suggestions/sugg_zzzzzzzz/accept"), "missing suggestion");
    expect(ErrorCode::PayloadMismatch, s.send("PATCH", p + "/clips/" + sc.c1.value, {{"element_kind", "circle"}}),
           "field of another payload");
    expect(ErrorCode::OutOfRange, s.send("POST", p + "/clips/" + sc.c1.value + "/split", {{"t", 50.0}}),
           "split outside clip");
    expect(ErrorCode::NotAdjacent, s.send("POST", p + "/clips/merge", {{"a", sc.c1.value}, {"b", sc.c1.value}}),
           "merge with itself");
    expect(ErrorCode::TrackMismatch, s.send("POST", p + "/clips/merge", {{"a", sc.c1.value}, {"b", sc.c3.value}}),
           "merge across tracks");
    expect(ErrorCode::OrderConflict, s.send("POST", p + "/tracks", {{"order_index", 1}}), "order taken");
    expect(ErrorCode::NonTextTrack, s.send("GET", p + "/script?tracks=" + sc.elem.value), "script of shapes");
    expect(ErrorCode::NotTextClip, s.send("POST", p + "/script/edit", {{"clip_id", sc.e1.value}, {"text", "x"}}),
           "edit a shape");
    expect(ErrorCode::OffsetOutOfRange, s.send("POST", p + "/script/split", {{"clip_id", sc.c1.value}, {"offset", 99}}),
           "split past the end");
    expect(ErrorCode::InvalidAnchor,
           s.send("POST", p + "/script/lines",
                  {{"anchor", {{"position", "after"}, {"line_index", 40}}}, {"text", "x"}, {"strategy", "sequential_same_track"}}),
           "anchor past the end");
    expect(ErrorCode::EmptyRange, s.send("POST", p + "/script/style", {{"begin", 0}, {"count", 0}, {"style", json::object()}}),
           "empty style batch");
    expect(ErrorCode::RangeViolation,
           s.send("POST", p + "/script/style", {{"begin", 0}, {"count", 1}, {"style", {{"font_size", 5000}}}}),
           "font size out of range");

    httplib::Client c("127.0.0.1", s.port);
    auto audio = c.Post(p + "/assets", httplib::MultipartFormDataItems{{"file", "aa", "a.mp3", "audio/mpeg"}});
    REQUIRE(audio);
    expect(ErrorCode::InvalidDuration, {audio->status, json::parse(audio->body)}, "audio without duration");

    json corrupt = doc;
    corrupt["project"] = 5;
    expect(ErrorCode::CorruptDocument, s.send("PUT", p, corrupt), "corrupt document");
    json version = doc;
    version["schema_version"] = "tae-99";
    expect(ErrorCode::UnsupportedSchemaVersion, s.send("PUT", p, version), "future schema");
    json dangling = doc;
    dangling["project"]["clips"][0]["track_id"] = "track_zzzzzzzz";
    expect(ErrorCode::DanglingReference, s.send("PUT", p, dangling), "dangling track");

    s.send("POST", p + "/script/edit", {{"clip_id", sc.c2.value}, {"text", "Second    line"}});
    json pending = s.send("POST", p + "/suggestions/refresh").body["suggestions"];
    REQUIRE_FALSE(pending.empty());
    expect(ErrorCode::StaleSuggestion,
           s.send("POST", p + "/suggestions/" + pending[0]["id"].get<std::string>() + "/accept", {{"revision", 0}}),
           "old client revision");

    // Chat: wrong state, invalid answer, busy session, provider failure.
    std::string sid = s.send("POST", p + "/chat/sessions", json::object()).body["id"];
    std::string sp = p + "/chat/sessions/" + sid;
    expect(ErrorCode::WrongState, s.send("POST", sp + "/approve"), "approve while idle");
    s.provider->mock->push({{"type", "clarify"}, {"question", "Which?"}, {"candidates", {sc.c1.value, sc.c2.value}}});
    s.send("POST", sp + "/messages", {{"text", "fix it"}});
    expect(ErrorCode::InvalidAnswer, s.send("POST", sp + "/answer", {{"answer", "clip_zzzzzzzz"}}), "answer not offered");

    {
        std::lock_guard lock(s.provider->m);
        s.provider->hold = true;
    }
    s.provider->mock->push({{"type", "assistant_text"}, {"text", "ok"}});
    std::thread answering([&] { s.send("POST", sp + "/answer", {{"answer", sc.c1.value}}); });
    s.provider->wait_entered();
    expect(ErrorCode::SessionBusy, s.send("POST", sp + "/reject", {{"feedback", "stop"}}), "session busy");
    s.provider->release();
    answering.join();

    // The mock is exhausted now, so the next plan fails with a provider error carried by the stream.
    Response failed = s.send("POST", sp + "/messages", {{"text", "again"}});
    REQUIRE(failed.status == 200);
    json last = failed.body["events"].back();
    CHECK(last["type"] == "failed");
    CHECK(last["payload"]["reason"] == "provider_error");
    ErrorCode provider = code_named(last["payload"]["error"]["code"]);
    CHECK(provider == ErrorCode::ProviderError);
    reached[provider] = "exhausted provider";

    // A store that can no longer be written surfaces as an internal error.
    fs::remove_all(s.dir);
    expect(ErrorCode::Internal, s.send("POST", p + "/script/edit", {{"clip_id", sc.c1.value}, {"text", "lost"}}),
           "store removed");

    // Registry construction and the renderer's own guard cannot be driven from requests.
    const std::set<ErrorCode> internal_only = {ErrorCode::DuplicateClass, ErrorCode::InvalidField, ErrorCode::UnknownField,
                                               ErrorCode::OutOfClipRange};
    for (ErrorCode code : all_error_codes()) {
        INFO(error_code_name(code));
        CHECK((reached.count(code) == 1) != (internal_only.count(code) == 1));
    }
}

TEST_CASE("event stream of an unknown project is a 404") {
    Server s;
    Response r = s.send("GET", "/api/projects/proj_zzzzzzzz/events");
    CHECK(r.status == 404);
    CHECK(r.body["code"] == "unknown_project");
}

TEST_CASE("deleting a project ends its event stream") {
    Server s;
    Scene sc(s);
    auto sse = std::make_unique<SseReader>(s, sc.pid);
    CHECK(s.send("DELETE", base(sc.pid)).status == 204);
    sse->thread.join();
    sse->thread = std::thread([] {});
    CHECK(sse->status == 200);
    CHECK(s.send("GET", base(sc.pid)).status == 404);
}
