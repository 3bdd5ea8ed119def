#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tae/llm/context.hpp"
#include "tae/tools/dispatch.hpp"

namespace tae {

enum class TemplateId {
    IntentComprehension,
    SemanticMatching,
    ElementModification,
    TextRefinement,
    ClipStrategy,
    InstructionSuggestions,
};

inline constexpr EnumTable<TemplateId, 6> kTemplateNames{{{{TemplateId::IntentComprehension, "intent_comprehension"},
                                                          {TemplateId::SemanticMatching, "semantic_matching"},
                                                          {TemplateId::ElementModification, "element_modification"},
                                                          {TemplateId::TextRefinement, "text_refinement"},
                                                          {TemplateId::ClipStrategy, "clip_strategy"},
                                                          {TemplateId::InstructionSuggestions, "instruction_suggestions"}}}};

/// Templates that are answered with tool calls (and therefore carry tools).
bool template_expects_tools(TemplateId id);

enum class ClarifyNeed { Selection, Parameters, Upload };

inline constexpr EnumTable<ClarifyNeed, 3> kClarifyNeedNames{
    {{{ClarifyNeed::Selection, "selection"}, {ClarifyNeed::Parameters, "parameters"}, {ClarifyNeed::Upload, "upload"}}}};

struct ToolCall {
    std::string name;
    json args = json::object();
    std::string rationale;  // optional explanation shown with the plan step
    bool operator==(const ToolCall&) const = default;
};

struct AssistantText {
    std::string text;
    bool operator==(const AssistantText&) const = default;
};

/// The model could not proceed without more input from the user.
struct Clarify {
    std::string question;
    std::vector<ObjectId> candidates;
    ClarifyNeed needed = ClarifyNeed::Selection;
    std::optional<std::string> target_class;  // class whose fields a parameter form should show
    bool operator==(const Clarify&) const = default;
};

struct Structured {
    json document;
    bool operator==(const Structured&) const = default;
};

using ProviderResponse = std::variant<ToolCall, AssistantText, Clarify, Structured>;

/// Wire form with a "type" discriminator: tool_call, assistant_text, clarify, structured.
json response_to_json(const ProviderResponse& response);
/// Throws ProviderError (malformed_output) on unknown or ill-typed input.
ProviderResponse response_from_json(const json& doc);

/// Requires `document[field]` to be one of `allowed`.
struct OutputConstraint {
    std::string field;
    std::vector<std::string> allowed;
};

struct ProviderRequest {
    TemplateId template_id = TemplateId::IntentComprehension;
    AgentContext context;
    std::vector<ToolDescriptor> tools;
    std::optional<OutputConstraint> constraint;
    bool structured = false;  // answer must be a Structured document
};

enum class ProviderFailure { Network, Timeout, MalformedOutput };

inline constexpr EnumTable<ProviderFailure, 3> kProviderFailureNames{{{{ProviderFailure::Network, "network"},
                                                                      {ProviderFailure::Timeout, "timeout"},
                                                                      {ProviderFailure::MalformedOutput, "malformed_output"}}}};

/// ProviderError carrying detail.kind.
Error provider_error(ProviderFailure kind, const std::string& message, json detail = json::object());

// Prompt truncation limits.
inline constexpr std::size_t kPromptLogEntries = 20;
inline constexpr std::size_t kPromptScriptChars = 4000;

/**
 * @brief Renders the prompt document for a template.
 *
 * Returns {template, messages:[{role:"system",content}, {role:"user",content}]}.
 * The user message holds the timeline summary, the script (newest 4000
 * code points), the last 20 log entries, assets, dialog and task, plus the
 * semantic mapping table for semantic_matching. Pure.
 */
json assemble_prompt(TemplateId template_id, const AgentContext& context);

/// Section header preceding the mapping table.
inline constexpr std::string_view kMappingSectionHeader = "## Semantic-animation mapping";

class Provider {
public:
    virtual ~Provider() = default;
    /// Raw completion. Throws ProviderError for transport failures.
    virtual ProviderResponse complete(const ProviderRequest& request, const json& prompt) = 0;
};

/**
 * @brief Validating front of a provider.
 *
 * Tool calls must name a requested tool with schema-valid arguments,
 * clarify candidates must be live ids, structured answers must honour the
 * request's constraint. Anything else is ProviderError(malformed_output).
 */
class Gateway {
public:
    explicit Gateway(std::shared_ptr<Provider> provider) : provider_(std::move(provider)) {}

    ProviderResponse complete(const ProviderRequest& request);
    [[nodiscard]] Provider& provider() const { return *provider_; }

private:
    std::shared_ptr<Provider> provider_;
};

/// Throws ProviderError when `response` is not acceptable for `request`.
void validate_response(const ProviderRequest& request, const ProviderResponse& response);

/**
 * @brief Scripted provider for tests and offline runs.
 *
 * Entries are response documents in wire form, or {"type":"error",
 * "kind":"network"|"timeout"|"malformed_output"} to raise a failure.
 * Every call is recorded with its assembled prompt.
 */
class MockProvider : public Provider {
public:
    struct Call {
        ProviderRequest request;
        json prompt;
    };

    explicit MockProvider(std::vector<json> script = {});
    explicit MockProvider(const std::vector<ProviderResponse>& script);

    ProviderResponse complete(const ProviderRequest& request, const json& prompt) override;

    void push(json entry);
    [[nodiscard]] std::vector<Call> calls() const;
    [[nodiscard]] std::size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::vector<json> script_;
    std::size_t next_ = 0;
    std::vector<Call> calls_;
};

struct HttpProviderConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o";
    std::string api_key;
    std::chrono::milliseconds timeout{30000};

    /// Reads TAE_LLM_BASE_URL, TAE_LLM_MODEL, TAE_LLM_API_KEY, TAE_LLM_TIMEOUT_SECONDS.
    static HttpProviderConfig from_env();
};

/// True when TAE_OFFLINE is set to a non-empty value other than "0".
bool offline_from_env();

/// Name of the reserved tool through which models ask for clarification.
inline constexpr std::string_view kClarifyToolName = "clarify";

/**
 * @brief Chat-completions client with function calling.
 *
 * Requested tools are sent as functions together with the reserved
 * "clarify" function. Structured requests ask for a JSON object reply.
 */
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {}

    ProviderResponse complete(const ProviderRequest& request, const json& prompt) override;

    /// Request body that would be sent for `request`.
    [[nodiscard]] json build_body(const ProviderRequest& request, const json& prompt) const;
    /// Maps a chat-completions reply to a response. Throws ProviderError.
    [[nodiscard]] static ProviderResponse parse_reply(const ProviderRequest& request, const json& reply);

private:
    HttpProviderConfig config_;
};

}  // namespace tae
