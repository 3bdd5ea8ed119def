#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tae/agents/inline_agents.hpp"
#include "tae/core/project_cell.hpp"
#include "tae/llm/gateway.hpp"
#include "tae/tools/dispatch.hpp"

namespace tae {

enum class SessionState { Idle, Planning, AwaitingApproval, AwaitingPromptAnswer, Executing, Done, Failed };
enum class StepKind { Edit, Query };
enum class StepStatus { Proposed, Approved, Modified, Rejected, Executed, Failed };
enum class PromptKind { Selector, ParameterForm, UploadButton };
/// Who let a step run.
enum class Approval { None, User, UserModified, AutoQuery, AutoSkip };

inline constexpr EnumTable<SessionState, 7> kSessionStateNames{{{{SessionState::Idle, "idle"},
                                                                 {SessionState::Planning, "planning"},
                                                                 {SessionState::AwaitingApproval, "awaiting_approval"},
                                                                 {SessionState::AwaitingPromptAnswer, "awaiting_prompt_answer"},
                                                                 {SessionState::Executing, "executing"},
                                                                 {SessionState::Done, "done"},
                                                                 {SessionState::Failed, "failed"}}}};
inline constexpr EnumTable<StepKind, 2> kStepKindNames{{{{StepKind::Edit, "edit"}, {StepKind::Query, "query"}}}};
inline constexpr EnumTable<StepStatus, 6> kStepStatusNames{{{{StepStatus::Proposed, "proposed"},
                                                             {StepStatus::Approved, "approved"},
                                                             {StepStatus::Modified, "modified"},
                                                             {StepStatus::Rejected, "rejected"},
                                                             {StepStatus::Executed, "executed"},
                                                             {StepStatus::Failed, "failed"}}}};
inline constexpr EnumTable<PromptKind, 3> kPromptKindNames{
    {{{PromptKind::Selector, "selector"}, {PromptKind::ParameterForm, "parameter_form"}, {PromptKind::UploadButton, "upload_button"}}}};
inline constexpr EnumTable<Approval, 5> kApprovalNames{{{{Approval::None, "none"},
                                                         {Approval::User, "user"},
                                                         {Approval::UserModified, "user_modified"},
                                                         {Approval::AutoQuery, "auto_query"},
                                                         {Approval::AutoSkip, "auto_skip"}}}};

struct PlanStep {
    ObjectId id;
    std::string tool;
    json args = json::object();
    std::string rationale;
    StepKind kind = StepKind::Edit;
    StepStatus status = StepStatus::Proposed;
    Approval approval = Approval::None;
    json result;                          // tool output or error, once run
    std::optional<std::int64_t> log_seq;  // operation-log entry written by the dispatch

    bool operator==(const PlanStep&) const = default;
};

struct UIPrompt {
    ObjectId id;
    PromptKind kind = PromptKind::Selector;
    std::string question;
    json payload = json::object();  // {options:[{id,label}]} | {fields:{...}} | {accepted_kinds:[...]}
    ObjectId bound_step;
    std::optional<std::string> target_class;

    bool operator==(const UIPrompt&) const = default;
};

struct ChatEvent {
    std::int64_t seq = 0;
    std::string type;  // plan_proposed, awaiting_approval, prompt, step_result, assistant_text, completed, failed
    json payload = json::object();

    bool operator==(const ChatEvent&) const = default;
};

struct ChatSession {
    ObjectId id;
    ObjectId project_id;
    json messages = json::array();
    std::vector<PlanStep> steps;
    bool auto_skip = false;
    std::optional<UIPrompt> pending_prompt;
    SessionState state = SessionState::Idle;
    int consecutive_failures = 0;
    std::vector<ChatEvent> events;
    std::optional<ObjectId> reserved_step;  // id promised to the step a prompt answer unblocks

    bool operator==(const ChatSession&) const = default;

    [[nodiscard]] const PlanStep* proposed_step() const;
};

json plan_step_to_json(const PlanStep& step);
json prompt_to_json(const UIPrompt& prompt);
json event_to_json(const ChatEvent& event);
json session_to_json(const ChatSession& session);
/// Throws CorruptDocument.
ChatSession session_from_json(const json& doc);

/// An "@{kind:id}" mention in a chat message.
struct ReferenceToken {
    std::string raw;
    std::string kind;
    ObjectId id;
    std::size_t offset = 0;  // byte offset of '@'
    bool resolved = false;

    bool operator==(const ReferenceToken&) const = default;
};

/// Finds every well-formed token; a token resolves when the id is live and has the named kind.
std::vector<ReferenceToken> resolve_references(const std::string& text, const Project& project);

// Failure budget and loop guard.
inline constexpr int kMaxConsecutiveFailures = 3;
inline constexpr int kMaxPlanIterations = 64;
inline constexpr std::size_t kMaxInstructionSuggestions = 5;
inline constexpr std::size_t kMaxInstructionChars = 120;

/// Context-aware next-instruction hints. LLM mode falls back to rules on provider errors.
std::vector<std::string> suggest_instructions(const Project& snapshot, AgentMode mode = AgentMode::Rule,
                                              Gateway* gateway = nullptr);

/**
 * @brief Plan-and-execute chat agent over one project.
 *
 * Each call runs the session until it needs the user again: a proposed
 * edit awaiting approval, a UI prompt, completion or failure. Query steps
 * and (with auto_skip) edits execute without approval. Provider calls
 * run without holding the project lock.
 */
class ChatOrchestrator {
public:
    using EventSink = std::function<void(const ObjectId& session, const ChatEvent& event)>;

    ChatOrchestrator(ProjectCell& cell, ToolDispatcher& dispatcher, std::shared_ptr<Gateway> gateway,
                     std::uint64_t seed = 0xc4a7ULL);

    void set_event_sink(EventSink sink);

    ChatSession start_session(bool auto_skip = false);
    void set_auto_skip(const ObjectId& session, bool auto_skip);

    /// Throws UnknownSession, SessionBusy, WrongState (failed session), DanglingReference.
    ChatSession submit_message(const ObjectId& session, const std::string& text,
                               const std::vector<ObjectId>& attachments = {});

    /// Throws UnknownSession, WrongState.
    ChatSession approve_step(const ObjectId& session);
    /// Throws UnknownSession, WrongState, SchemaViolation.
    ChatSession modify_step(const ObjectId& session, const json& new_args);
    ChatSession reject_step(const ObjectId& session, const std::string& feedback = "");
    /// Throws UnknownSession, WrongState, InvalidAnswer.
    ChatSession answer_prompt(const ObjectId& session, const json& answer);

    /// Latest published copy. Throws UnknownSession.
    [[nodiscard]] ChatSession session(const ObjectId& id) const;
    [[nodiscard]] std::vector<ChatSession> sessions() const;

    /// Restores persisted sessions; pipelines cut short by a restart come back idle.
    void restore(const std::vector<ChatSession>& sessions);

private:
    struct Slot {
        std::mutex mutex;
        ChatSession live;
    };

    std::shared_ptr<Slot> slot(const ObjectId& id) const;
    void emit(ChatSession& s, std::string type, json payload);
    void publish(const ChatSession& s);
    void run(ChatSession& s);
    void plan_next(ChatSession& s);
    void execute_step(ChatSession& s, PlanStep& step);
    void record_failure(ChatSession& s);
    ObjectId new_id(IdKind kind);

    ProjectCell& cell_;
    ToolDispatcher& dispatcher_;
    std::shared_ptr<Gateway> gateway_;
    mutable std::mutex mutex_;
    IdGenerator ids_;
    std::map<ObjectId, std::shared_ptr<Slot>> slots_;
    std::map<ObjectId, ChatSession> published_;
    EventSink sink_;
};

}  // namespace tae
