#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "tae/chat/orchestrator.hpp"
#include "tae/service/events.hpp"
#include "tae/service/store.hpp"

namespace tae {

/// Provider used when no model is configured; every call fails with a network error.
class OfflineProvider : public Provider {
public:
    ProviderResponse complete(const ProviderRequest& request, const json& prompt) override;
};

struct ServiceConfig {
    std::filesystem::path data_dir = "data";
    std::shared_ptr<Gateway> gateway;  // null: offline
    AgentMode agent_mode = AgentMode::Rule;
    std::chrono::milliseconds debounce{500};
    ToolDispatcher::Clock clock;  // log timestamps; wall clock when empty
};

/**
 * @brief Everything the HTTP layer and the CLI need, without HTTP.
 *
 * Projects are loaded lazily from the store and kept in memory. Every
 * mutation goes through the project's cell, is saved, and is announced on
 * the event hub. Inline suggestions for edited text clips are recomputed
 * after `debounce` of inactivity on a background worker.
 */
class EditorService {
public:
    explicit EditorService(ServiceConfig config);
    ~EditorService();
    EditorService(const EditorService&) = delete;
    EditorService& operator=(const EditorService&) = delete;

    [[nodiscard]] const MetaRegistry& registry() const { return registry_; }
    [[nodiscard]] ToolDispatcher& dispatcher() { return dispatcher_; }
    [[nodiscard]] EventHub& events() { return hub_; }
    [[nodiscard]] const ProjectStore& store() const { return store_; }
    [[nodiscard]] AgentMode agent_mode() const { return agents_.mode(); }

    // projects
    json create_project(const json& options);
    json list_projects();
    json document(const ObjectId& project);
    /// Replaces the whole document. The id must match; the revision keeps increasing.
    json replace_document(const ObjectId& project, const json& doc);
    void delete_project(const ObjectId& project);
    std::shared_ptr<const Project> snapshot(const ObjectId& project);
    /// Throws UnknownProject.
    void require_project(const ObjectId& project);

    // timeline
    json call_tool(const ObjectId& project, const std::string& tool, const json& args, Actor actor = Actor::User);
    json create_track(const ObjectId& project, const json& body);
    void delete_track(const ObjectId& project, const ObjectId& track);
    json split_clip(const ObjectId& project, const ObjectId& clip, double at_seconds);
    json merge_clips(const ObjectId& project, const ObjectId& a, const ObjectId& b);
    json frame(const ObjectId& project, double t);

    // script
    json script(const ObjectId& project, const std::optional<std::vector<ObjectId>>& tracks = std::nullopt);
    json script_edit(const ObjectId& project, const ObjectId& clip, const std::string& text);
    json script_split(const ObjectId& project, const ObjectId& clip, std::size_t offset);
    json script_merge(const ObjectId& project, const ObjectId& a, const ObjectId& b);
    /// {anchor:{position,line_index}, text, strategy?, preferred_track?, tracks?}; without a strategy the placement agent decides.
    json script_add_line(const ObjectId& project, const json& body);
    json script_style(const ObjectId& project, const json& body);
    json script_set_tracks(const ObjectId& project, const std::vector<ObjectId>& tracks);

    // suggestions
    json suggestions(const ObjectId& project);
    json accept_suggestion(const ObjectId& project, const ObjectId& suggestion, std::optional<std::int64_t> revision);
    void dismiss_suggestion(const ObjectId& project, const ObjectId& suggestion);
    /// Recomputes suggestions for every text clip now; returns the pending list.
    json refresh_suggestions(const ObjectId& project);
    /// Runs debounced work that is already due or scheduled.
    void flush_suggestions();

    // chat
    ChatSession start_session(const ObjectId& project, bool auto_skip);
    std::vector<ChatSession> sessions(const ObjectId& project);
    ChatSession session(const ObjectId& project, const ObjectId& session);
    ChatSession set_auto_skip(const ObjectId& project, const ObjectId& session, bool auto_skip);
    ChatSession submit_message(const ObjectId& project, const ObjectId& session, const std::string& text,
                               const std::vector<ObjectId>& attachments);
    ChatSession approve_step(const ObjectId& project, const ObjectId& session);
    ChatSession modify_step(const ObjectId& project, const ObjectId& session, const json& args);
    ChatSession reject_step(const ObjectId& project, const ObjectId& session, const std::string& feedback);
    ChatSession answer_prompt(const ObjectId& project, const ObjectId& session, const json& answer);
    std::vector<std::string> instructions(const ObjectId& project, std::optional<AgentMode> mode);

    // assets
    json upload_asset(const ObjectId& project, const std::string& filename, const std::string& content_type,
                      const std::string& bytes, std::optional<double> media_duration);
    json assets(const ObjectId& project);
    /// Path of the stored bytes. Throws UnknownProject, UnknownAsset.
    std::filesystem::path asset_file(const ObjectId& project, const ObjectId& asset);

private:
    struct Handle : std::enable_shared_from_this<Handle> {
        Handle(Project p, std::uint64_t seed) : cell(std::move(p)), book(seed) {}
        ObjectId id;
        ProjectCell cell;
        SuggestionBook book;
        std::unique_ptr<ChatOrchestrator> chat;
        std::mutex settle_mutex;
        std::mutex recompute_mutex;
        std::map<ObjectId, Clip> seen_clips;
        std::int64_t announced_revision = -1;
        std::set<ObjectId> dirty;  // guarded by work_mutex_
        std::chrono::steady_clock::time_point due;
    };

    std::shared_ptr<Handle> handle(const ObjectId& project);
    std::shared_ptr<Handle> adopt(StoredProject stored);
    /// Runs `fn` under the project lock, logging it as `tool` when `log` is set.
    template <class Fn>
    json edit(Handle& h, const std::string& tool, const json& args, Fn&& fn, bool log = true);
    /// Saves, announces the new revision, drops stale suggestions and schedules recomputation.
    void settle(Handle& h);
    void recompute(Handle& h, const std::set<ObjectId>& clips);
    void worker();
    std::int64_t now() const;

    ServiceConfig config_;
    MetaRegistry registry_;
    ToolDispatcher dispatcher_;
    ProjectStore store_;
    EventHub hub_;
    std::shared_ptr<Gateway> gateway_;
    InlineAgents agents_;

    std::mutex handles_mutex_;
    std::map<ObjectId, std::shared_ptr<Handle>> handles_;

    std::mutex work_mutex_;
    std::condition_variable work_cv_;
    std::map<ObjectId, std::shared_ptr<Handle>> scheduled_;
    bool stopping_ = false;
    std::thread worker_;
};

}  // namespace tae
