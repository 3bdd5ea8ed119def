#include "tae/service/http_api.hpp"

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tae/core/serialize.hpp"
#include "tae/timeline/presets.hpp"

namespace tae {

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownClass:
        case ErrorCode::UnknownAsset:
        case ErrorCode::UnknownTrack:
        case ErrorCode::UnknownClip:
        case ErrorCode::UnknownAnimation:
        case ErrorCode::UnknownPreset:
        case ErrorCode::UnknownTool:
        case ErrorCode::UnknownSuggestion:
        case ErrorCode::UnknownProject:
        case ErrorCode::UnknownSession:
            return 404;
        case ErrorCode::DuplicateClass:
        case ErrorCode::OrderConflict:
        case ErrorCode::Overlap:
        case ErrorCode::NotAdjacent:
        case ErrorCode::TrackMismatch:
        case ErrorCode::StaleSuggestion:
        case ErrorCode::SessionBusy:
        case ErrorCode::WrongState:
            return 409;
        case ErrorCode::ProviderError:
            return 502;
        case ErrorCode::Internal:
            return 500;
        default:
            return 400;
    }
}

namespace {

using httplib::Request;
using httplib::Response;

Error bad_request(const std::string& message, json detail = json::object()) {
    return Error(ErrorCode::BadRequest, message, std::move(detail));
}

void send_json(Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(Response& res, const Error& e) { send_json(res, e.to_json(), http_status(e.code())); }

json body_of(const Request& req) {
    if (req.body.empty()) return json::object();
    json doc = json::parse(req.body, nullptr, false);
    if (doc.is_discarded()) throw bad_request("request body is not valid JSON");
    if (!doc.is_object()) throw bad_request("request body must be a JSON object");
    return doc;
}

ObjectId param(const Request& req, const char* name) { return ObjectId(req.path_params.at(name)); }

std::string string_field(const json& body, const char* key) {
    if (!body.contains(key) || !body[key].is_string()) throw bad_request(std::string("'") + key + "' must be a string");
    return body[key].get<std::string>();
}

std::vector<ObjectId> ids_field(const json& body, const char* key) {
    std::vector<ObjectId> out;
    if (!body.contains(key)) return out;
    if (!body[key].is_array()) throw bad_request(std::string("'") + key + "' must be an array of ids");
    for (const auto& v : body[key]) {
        if (!v.is_string()) throw bad_request(std::string("'") + key + "' must be an array of ids");
        out.emplace_back(v.get<std::string>());
    }
    return out;
}

double number_text(const std::string& text, const char* what) {
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
        throw bad_request(std::string("'") + what + "' must be a number", {{what, text}});
    }
    return v;
}

json session_json(const ChatSession& s) { return session_to_json(s); }

}  // namespace

struct HttpApi::Impl {
    EditorService& service;
    httplib::Server server;
    std::atomic<bool> stopping{false};

    explicit Impl(EditorService& s) : service(s) {
        server.new_task_queue = [] { return new httplib::ThreadPool(32); };
        routes();
    }

    using Handler = std::function<void(const Request&, Response&)>;

    /// Wraps a handler with the error mapping.
    static httplib::Server::Handler guarded(Handler fn) {
        return [fn = std::move(fn)](const Request& req, Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                send_error(res, e);
            } catch (const json::exception& e) {
                send_error(res, bad_request(std::string("malformed request: ") + e.what()));
            } catch (const std::exception& e) {
                send_error(res, Error(ErrorCode::Internal, e.what()));
            }
        };
    }

    void get(const std::string& path, Handler fn) { server.Get(path, guarded(std::move(fn))); }
    void post(const std::string& path, Handler fn) { server.Post(path, guarded(std::move(fn))); }
    void put(const std::string& path, Handler fn) { server.Put(path, guarded(std::move(fn))); }
    void patch(const std::string& path, Handler fn) { server.Patch(path, guarded(std::move(fn))); }
    void del(const std::string& path, Handler fn) { server.Delete(path, guarded(std::move(fn))); }

    void routes();
    void catalog_routes();
    void project_routes();
    void timeline_routes();
    void script_routes();
    void suggestion_routes();
    void chat_routes();
    void asset_routes();
    void stream(const Request& req, Response& res);
};

void HttpApi::Impl::routes() {
    catalog_routes();
    project_routes();
    timeline_routes();
    script_routes();
    suggestion_routes();
    chat_routes();
    asset_routes();
    server.set_error_handler([](const Request& req, Response& res) {
        if (!res.body.empty()) return;
        if (res.status == 404) {
            send_json(res, Error(ErrorCode::BadRequest, "no such route", {{"path", req.path}}).to_json(), 404);
        }
    });
}

void HttpApi::Impl::catalog_routes() {
    get("/api/health", [](const Request&, Response& res) { send_json(res, {{"ok", true}}); });
    get("/api/tools", [this](const Request&, Response& res) {
        send_json(res, tools_document(service.dispatcher().tools()));
    });
    get("/api/classes", [this](const Request&, Response& res) {
        json out = json::array();
        for (const auto& [name, cls] : service.registry().classes()) {
            out.push_back({{"name", name}, {"category", class_category_name(cls.category)}});
        }
        send_json(res, out);
    });
    get("/api/classes/:name/schema", [this](const Request& req, Response& res) {
        send_json(res, service.registry().reflect_schema(req.path_params.at("name")));
    });
    get("/api/presets", [](const Request&, Response& res) { send_json(res, preset_names()); });
    get("/api/error_codes", [](const Request&, Response& res) {
        json out = json::array();
        for (ErrorCode c : all_error_codes()) out.push_back({{"code", error_code_name(c)}, {"status", http_status(c)}});
        send_json(res, out);
    });
}

void HttpApi::Impl::project_routes() {
    post("/api/projects", [this](const Request& req, Response& res) {
        send_json(res, service.create_project(body_of(req)), 201);
    });
    get("/api/projects", [this](const Request&, Response& res) { send_json(res, service.list_projects()); });
    get("/api/projects/:pid", [this](const Request& req, Response& res) {
        send_json(res, service.document(param(req, "pid")));
    });
    put("/api/projects/:pid", [this](const Request& req, Response& res) {
        send_json(res, service.replace_document(param(req, "pid"), body_of(req)));
    });
    del("/api/projects/:pid", [this](const Request& req, Response& res) {
        service.delete_project(param(req, "pid"));
        res.status = 204;
    });
    get("/api/projects/:pid/events", [this](const Request& req, Response& res) { stream(req, res); });
    get("/api/projects/:pid/frame", [this](const Request& req, Response& res) {
        if (!req.has_param("t")) throw bad_request("query parameter t is required");
        send_json(res, service.frame(param(req, "pid"), number_text(req.get_param_value("t"), "t")));
    });
    get("/api/projects/:pid/log", [this](const Request& req, Response& res) {
        auto snap = service.snapshot(param(req, "pid"));
        json out = json::array();
        for (const auto& e : snap->operation_log) out.push_back(log_entry_to_json(e));
        send_json(res, out);
    });
}

void HttpApi::Impl::stream(const Request& req, Response& res) {
    ObjectId pid = param(req, "pid");
    service.require_project(pid);
    auto sub = service.events().subscribe(pid);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, sub](std::size_t, httplib::DataSink& sink) {
            if (stopping.load()) return false;
            auto ev = sub->next(std::chrono::milliseconds(500));
            std::string chunk;
            if (ev) {
                chunk = sse_frame(*ev);
            } else if (sub->closed()) {
                sink.done();
                return true;
            } else {
                chunk = ": keepalive\n\n";
            }
            return sink.write(chunk.data(), chunk.size());
        },
        [sub](bool) { sub->close(); });
}

void HttpApi::Impl::timeline_routes() {
    post("/api/projects/:pid/tools/:tool", [this](const Request& req, Response& res) {
        send_json(res, service.call_tool(param(req, "pid"), req.path_params.at("tool"), body_of(req)));
    });
    post("/api/projects/:pid/tracks", [this](const Request& req, Response& res) {
        send_json(res, service.create_track(param(req, "pid"), body_of(req)), 201);
    });
    del("/api/projects/:pid/tracks/:tid", [this](const Request& req, Response& res) {
        service.delete_track(param(req, "pid"), param(req, "tid"));
        res.status = 204;
    });
    post("/api/projects/:pid/clips", [this](const Request& req, Response& res) {
        send_json(res, service.call_tool(param(req, "pid"), "create_clip", body_of(req)), 201);
    });
    post("/api/projects/:pid/clips/merge", [this](const Request& req, Response& res) {
        json body = body_of(req);
        send_json(res, service.merge_clips(param(req, "pid"), ObjectId(string_field(body, "a")),
                                           ObjectId(string_field(body, "b"))));
    });
    get("/api/projects/:pid/clips/:cid", [this](const Request& req, Response& res) {
        auto snap = service.snapshot(param(req, "pid"));
        send_json(res, clip_to_json(snap->clip(param(req, "cid"))));
    });
    patch("/api/projects/:pid/clips/:cid", [this](const Request& req, Response& res) {
        json args = body_of(req);
        args["id"] = req.path_params.at("cid");
        send_json(res, service.call_tool(param(req, "pid"), "update_clip", args));
    });
    del("/api/projects/:pid/clips/:cid", [this](const Request& req, Response& res) {
        service.call_tool(param(req, "pid"), "delete_clip", {{"id", req.path_params.at("cid")}});
        res.status = 204;
    });
    post("/api/projects/:pid/clips/:cid/split", [this](const Request& req, Response& res) {
        json body = body_of(req);
        if (!body.contains("t") || !body["t"].is_number()) throw bad_request("'t' must be a number of seconds");
        send_json(res, service.split_clip(param(req, "pid"), param(req, "cid"), body["t"].get<double>()));
    });
    post("/api/projects/:pid/clips/:cid/animations", [this](const Request& req, Response& res) {
        json body = body_of(req);
        std::string preset = string_field(body, "preset");
        if (!find_preset(preset)) throw Error(ErrorCode::UnknownPreset, "unknown preset " + preset, {{"preset", preset}});
        json args = body.value("params", json::object());
        if (!args.is_object()) throw bad_request("'params' must be an object");
        args["clip_id"] = req.path_params.at("cid");
        send_json(res, service.call_tool(param(req, "pid"), "create_" + preset, args), 201);
    });
    patch("/api/projects/:pid/animations/:aid", [this](const Request& req, Response& res) {
        ObjectId pid = param(req, "pid");
        json body = body_of(req);
        json args = body.value("params", json::object());
        if (!args.is_object()) throw bad_request("'params' must be an object");
        std::string preset = service.snapshot(pid)->animation(param(req, "aid")).preset;
        args["id"] = req.path_params.at("aid");
        send_json(res, service.call_tool(pid, "update_" + preset, args));
    });
    del("/api/projects/:pid/animations/:aid", [this](const Request& req, Response& res) {
        ObjectId pid = param(req, "pid");
        std::string preset = service.snapshot(pid)->animation(param(req, "aid")).preset;
        service.call_tool(pid, "delete_" + preset, {{"id", req.path_params.at("aid")}});
        res.status = 204;
    });
}

void HttpApi::Impl::script_routes() {
    get("/api/projects/:pid/script", [this](const Request& req, Response& res) {
        std::optional<std::vector<ObjectId>> tracks;
        if (req.has_param("tracks")) {
            tracks.emplace();
            std::stringstream ss(req.get_param_value("tracks"));
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) tracks->emplace_back(item);
            }
        }
        send_json(res, service.script(param(req, "pid"), tracks));
    });
    post("/api/projects/:pid/script/edit", [this](const Request& req, Response& res) {
        json body = body_of(req);
        send_json(res, service.script_edit(param(req, "pid"), ObjectId(string_field(body, "clip_id")),
                                           string_field(body, "text")));
    });
    post("/api/projects/:pid/script/split", [this](const Request& req, Response& res) {
        json body = body_of(req);
        const json& off = body.contains("offset") ? body["offset"] : json();
        if (!off.is_number_integer() || off.get<std::int64_t>() < 0) throw bad_request("'offset' must be an integer >= 0");
        send_json(res, service.script_split(param(req, "pid"), ObjectId(string_field(body, "clip_id")),
                                            off.get<std::size_t>()));
    });
    post("/api/projects/:pid/script/merge", [this](const Request& req, Response& res) {
        json body = body_of(req);
        send_json(res, service.script_merge(param(req, "pid"), ObjectId(string_field(body, "a")),
                                            ObjectId(string_field(body, "b"))));
    });
    post("/api/projects/:pid/script/lines", [this](const Request& req, Response& res) {
        send_json(res, service.script_add_line(param(req, "pid"), body_of(req)), 201);
    });
    post("/api/projects/:pid/script/style", [this](const Request& req, Response& res) {
        send_json(res, service.script_style(param(req, "pid"), body_of(req)));
    });
    put("/api/projects/:pid/script/tracks", [this](const Request& req, Response& res) {
        json body = body_of(req);
        if (!body.contains("track_ids")) throw bad_request("'track_ids' is required");
        send_json(res, service.script_set_tracks(param(req, "pid"), ids_field(body, "track_ids")));
    });
}

void HttpApi::Impl::suggestion_routes() {
    get("/api/projects/:pid/suggestions", [this](const Request& req, Response& res) {
        send_json(res, service.suggestions(param(req, "pid")));
    });
    post("/api/projects/:pid/suggestions/refresh", [this](const Request& req, Response& res) {
        send_json(res, service.refresh_suggestions(param(req, "pid")));
    });
    post("/api/projects/:pid/suggestions/:sid/accept", [this](const Request& req, Response& res) {
        json body = body_of(req);
        std::optional<std::int64_t> revision;
        if (body.contains("revision")) {
            if (!body["revision"].is_number_integer()) throw bad_request("'revision' must be an integer");
            revision = body["revision"].get<std::int64_t>();
        }
        send_json(res, service.accept_suggestion(param(req, "pid"), param(req, "sid"), revision));
    });
    post("/api/projects/:pid/suggestions/:sid/dismiss", [this](const Request& req, Response& res) {
        service.dismiss_suggestion(param(req, "pid"), param(req, "sid"));
        send_json(res, {{"dismissed", req.path_params.at("sid")}});
    });
}

void HttpApi::Impl::chat_routes() {
    get("/api/projects/:pid/chat/instructions", [this](const Request& req, Response& res) {
        std::optional<AgentMode> mode;
        if (req.has_param("mode")) {
            mode = kAgentModeNames.parse(req.get_param_value("mode"));
            if (!mode) throw bad_request("mode must be rule or llm");
        }
        send_json(res, {{"suggestions", service.instructions(param(req, "pid"), mode)}});
    });
    get("/api/projects/:pid/chat/sessions", [this](const Request& req, Response& res) {
        json out = json::array();
        for (const auto& s : service.sessions(param(req, "pid"))) out.push_back(session_json(s));
        send_json(res, out);
    });
    post("/api/projects/:pid/chat/sessions", [this](const Request& req, Response& res) {
        json body = body_of(req);
        bool auto_skip = body.value("auto_skip", false);
        send_json(res, session_json(service.start_session(param(req, "pid"), auto_skip)), 201);
    });
    get("/api/projects/:pid/chat/sessions/:sid", [this](const Request& req, Response& res) {
        send_json(res, session_json(service.session(param(req, "pid"), param(req, "sid"))));
    });
    get("/api/projects/:pid/chat/sessions/:sid/events", [this](const Request& req, Response& res) {
        std::int64_t after = req.has_param("after") ? static_cast<std::int64_t>(number_text(req.get_param_value("after"), "after")) : 0;
        json out = json::array();
        for (const auto& e : service.session(param(req, "pid"), param(req, "sid")).events) {
            if (e.seq > after) out.push_back(event_to_json(e));
        }
        send_json(res, out);
    });
    put("/api/projects/:pid/chat/sessions/:sid/auto_skip", [this](const Request& req, Response& res) {
        json body = body_of(req);
        if (!body.contains("auto_skip") || !body["auto_skip"].is_boolean()) throw bad_request("'auto_skip' must be a boolean");
        send_json(res, session_json(service.set_auto_skip(param(req, "pid"), param(req, "sid"), body["auto_skip"].get<bool>())));
    });
    post("/api/projects/:pid/chat/sessions/:sid/messages", [this](const Request& req, Response& res) {
        json body = body_of(req);
        send_json(res, session_json(service.submit_message(param(req, "pid"), param(req, "sid"), string_field(body, "text"),
                                                           ids_field(body, "attachments"))));
    });
    post("/api/projects/:pid/chat/sessions/:sid/approve", [this](const Request& req, Response& res) {
        send_json(res, session_json(service.approve_step(param(req, "pid"), param(req, "sid"))));
    });
    post("/api/projects/:pid/chat/sessions/:sid/modify", [this](const Request& req, Response& res) {
        json body = body_of(req);
        if (!body.contains("args") || !body["args"].is_object()) throw bad_request("'args' must be an object");
        send_json(res, session_json(service.modify_step(param(req, "pid"), param(req, "sid"), body["args"])));
    });
    post("/api/projects/:pid/chat/sessions/:sid/reject", [this](const Request& req, Response& res) {
        json body = body_of(req);
        send_json(res, session_json(service.reject_step(param(req, "pid"), param(req, "sid"),
                                                        body.value("feedback", std::string()))));
    });
    post("/api/projects/:pid/chat/sessions/:sid/answer", [this](const Request& req, Response& res) {
        json body = body_of(req);
        if (!body.contains("answer")) throw bad_request("'answer' is required");
        send_json(res, session_json(service.answer_prompt(param(req, "pid"), param(req, "sid"), body["answer"])));
    });
}

void HttpApi::Impl::asset_routes() {
    post("/api/projects/:pid/assets", [this](const Request& req, Response& res) {
        if (!req.is_multipart_form_data() || !req.has_file("file")) {
            throw bad_request("upload must be multipart/form-data with a 'file' part");
        }
        auto file = req.get_file_value("file");
        std::optional<double> duration;
        if (req.has_file("duration")) duration = number_text(req.get_file_value("duration").content, "duration");
        send_json(res, service.upload_asset(param(req, "pid"), file.filename, file.content_type, file.content, duration),
                  201);
    });
    get("/api/projects/:pid/assets", [this](const Request& req, Response& res) {
        send_json(res, service.assets(param(req, "pid")));
    });
    get("/api/projects/:pid/assets/:aid", [this](const Request& req, Response& res) {
        auto path = service.asset_file(param(req, "pid"), param(req, "aid"));
        std::ifstream in(path, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        res.set_content(buf.str(), "application/octet-stream");
    });
}

HttpApi::HttpApi(EditorService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpApi::run() { return impl_->server.listen_after_bind(); }

void HttpApi::stop() {
    impl_->stopping = true;
    impl_->service.events().close_all();
    impl_->server.stop();
}

bool HttpApi::running() const { return impl_->server.is_running(); }

}  // namespace tae
