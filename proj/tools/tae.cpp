#include <CLI11.hpp>

#include <pthread.h>
#include <signal.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "tae/service/http_api.hpp"
#include "tae/timeline/evaluate.hpp"
#include "tae/timeline/presets.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::optional<tae::json> read_json(const std::string& path, std::string& error) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        error = "cannot open " + path;
        return std::nullopt;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    tae::json doc = tae::json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded()) {
        error = path + " is not valid JSON";
        return std::nullopt;
    }
    return doc;
}

int run_validate(const std::string& file) {
    std::string error;
    auto doc = read_json(file, error);
    if (!doc) {
        std::cerr << "invalid: " << error << "\n";
        return kExitFailure;
    }
    try {
        auto registry = tae::make_builtin_registry();
        tae::StoredProject stored = tae::parse_store_document(*doc, &registry);
        std::cout << "ok: " << stored.project.id.value << " revision " << stored.project.revision << ", "
                  << stored.project.clips.size() << " clips, " << stored.sessions.size() << " chat sessions\n";
        return kExitOk;
    } catch (const tae::Error& e) {
        std::cerr << "invalid: " << tae::error_code_name(e.code()) << ": " << e.what() << "\n";
        return kExitFailure;
    }
}

int run_export(const std::string& data_dir, const std::string& project, double fps, const std::string& out_path) {
    if (!std::isfinite(fps) || fps <= 0) {
        std::cerr << "--fps must be positive\n";
        return kExitUsage;
    }
    try {
        tae::ProjectStore store(data_dir);
        auto registry = tae::make_builtin_registry();
        tae::Project p = store.load(tae::ObjectId(project), &registry).project;
        auto frames = static_cast<std::int64_t>(std::ceil(p.span().seconds() * fps - 1e-9));
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            std::cerr << "cannot write " << out_path << "\n";
            return kExitFailure;
        }
        for (std::int64_t i = 0; i < frames; ++i) {
            double t = static_cast<double>(i) / fps;
            out << tae::frame_to_json(t, tae::snapshot_frame(p, t)).dump() << "\n";
        }
        out.flush();
        if (!out) {
            std::cerr << "write to " << out_path << " failed\n";
            return kExitFailure;
        }
        std::cout << "wrote " << frames << " frames to " << out_path << "\n";
        return kExitOk;
    } catch (const tae::Error& e) {
        std::cerr << "export failed: " << tae::error_code_name(e.code()) << ": " << e.what() << "\n";
        return kExitFailure;
    }
}

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir = "data";
    bool offline = false;
    std::string mock_script;
    std::string agent_mode = "rule";
    int debounce_ms = 500;
};

int run_serve(const ServeOptions& o) {
    tae::ServiceConfig config;
    config.data_dir = o.data_dir;
    config.debounce = std::chrono::milliseconds(o.debounce_ms);
    config.agent_mode = *tae::kAgentModeNames.parse(o.agent_mode);
    if (!o.mock_script.empty()) {
        std::string error;
        auto doc = read_json(o.mock_script, error);
        if (!doc || !doc->is_array()) {
            std::cerr << (doc ? o.mock_script + " must hold a JSON array" : error) << "\n";
            return kExitUsage;
        }
        config.gateway = std::make_shared<tae::Gateway>(std::make_shared<tae::MockProvider>(doc->get<std::vector<tae::json>>()));
    } else if (!o.offline && !tae::offline_from_env()) {
        config.gateway = std::make_shared<tae::Gateway>(
            std::make_shared<tae::HttpProvider>(tae::HttpProviderConfig::from_env()));
    }

    // Signals are taken by a dedicated thread so shutdown runs outside a handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    try {
        tae::EditorService service(config);
        tae::HttpApi api(service);
        int port = api.bind(o.host, o.port);
        if (port < 0) {
            std::cerr << "cannot bind " << o.host << ":" << o.port << "\n";
            return kExitFailure;
        }
        std::cout << "listening on http://" << o.host << ":" << port << std::endl;
        std::thread waiter([&] {
            int sig = 0;
            sigwait(&signals, &sig);
            api.stop();
        });
        api.run();
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
        return kExitOk;
    } catch (const tae::Error& e) {
        std::cerr << "serve failed: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-animation editing engine and agent service"};
    app.require_subcommand(1);

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--host", serve.host, "Interface to bind")->capture_default_str();
    serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)")->capture_default_str()->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--data-dir", serve.data_dir, "Project store directory")->capture_default_str();
    serve_cmd->add_flag("--offline", serve.offline, "Run without a language model");
    serve_cmd->add_option("--mock-script", serve.mock_script, "JSON array of scripted model responses")
        ->check(CLI::ExistingFile);
    serve_cmd->add_option("--agent-mode", serve.agent_mode, "Inline agent mode")
        ->check(CLI::IsMember({"rule", "llm"}))
        ->capture_default_str();
    serve_cmd->add_option("--debounce-ms", serve.debounce_ms, "Suggestion debounce")->capture_default_str()->check(CLI::NonNegativeNumber);

    std::string export_dir = "data", export_project, export_out;
    double export_fps = 0;
    auto* export_cmd = app.add_subcommand("export", "Write render states as JSON lines");
    export_cmd->add_option("--project", export_project, "Project id")->required();
    export_cmd->add_option("--fps", export_fps, "Frames per second")->required();
    export_cmd->add_option("--out", export_out, "Output file")->required();
    export_cmd->add_option("--data-dir", export_dir, "Project store directory")->capture_default_str();

    std::string validate_file;
    auto* validate_cmd = app.add_subcommand("validate", "Check a project file");
    validate_cmd->add_option("file", validate_file, "Project document")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (*serve_cmd) return run_serve(serve);
    if (*export_cmd) return run_export(export_dir, export_project, export_fps, export_out);
    if (*validate_cmd) return run_validate(validate_file);
    return kExitUsage;
}
