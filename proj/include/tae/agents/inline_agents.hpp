#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tae/agents/semantics.hpp"
#include "tae/llm/gateway.hpp"
#include "tae/script/script.hpp"
#include "tae/tools/dispatch.hpp"

namespace tae {

enum class SuggestionKind { TextRevision, AnimationRecommendation };
enum class SuggestionStatus { Pending, Accepted, Dismissed };

inline constexpr EnumTable<SuggestionKind, 2> kSuggestionKindNames{
    {{{SuggestionKind::TextRevision, "text_revision"}, {SuggestionKind::AnimationRecommendation, "animation_recommendation"}}}};
inline constexpr EnumTable<SuggestionStatus, 3> kSuggestionStatusNames{
    {{{SuggestionStatus::Pending, "pending"}, {SuggestionStatus::Accepted, "accepted"}, {SuggestionStatus::Dismissed, "dismissed"}}}};

struct SuggestionTarget {
    ObjectId clip_id;
    std::optional<CharRange> char_range;
    bool operator==(const SuggestionTarget&) const = default;
};

/**
 * @brief An inert proposal from an inline agent.
 *
 * Text revisions carry action {replacement, range?}; without a range the
 * replacement is the whole line. Animation recommendations carry
 * {preset, params}. `fingerprint` is the target clip as it was when the
 * suggestion was made; acceptance refuses to run if the clip changed.
 */
struct Suggestion {
    ObjectId id;
    SuggestionKind kind = SuggestionKind::TextRevision;
    SuggestionTarget target;
    json action = json::object();
    std::string reason;
    SuggestionStatus status = SuggestionStatus::Pending;
    std::int64_t revision = 0;
    std::string fingerprint;

    bool operator==(const Suggestion&) const = default;
};

/// Builds a pending suggestion against `snapshot`. Throws InvalidField for an empty reason, UnknownClip.
Suggestion make_suggestion(const Project& snapshot, SuggestionKind kind, SuggestionTarget target, json action,
                           std::string reason);

json suggestion_to_json(const Suggestion& s);

/// The exact tool invocation that accepting `s` performs.
ToolCall suggestion_tool_call(const Suggestion& s, const Project& project);

/**
 * @brief Pending and decided suggestions of one project.
 *
 * Thread-safe. Acceptance goes through the tool dispatcher with actor
 * inline_agent, so it leaves one log entry like any other edit.
 */
class SuggestionBook {
public:
    explicit SuggestionBook(std::uint64_t seed = 0x5e6e57ULL) : ids_(seed) {}

    /// Assigns an id and stores the suggestion. Returns the stored copy.
    Suggestion add(Suggestion s);

    [[nodiscard]] std::vector<Suggestion> pending() const;
    [[nodiscard]] std::vector<Suggestion> all() const;
    /// Throws UnknownSuggestion.
    [[nodiscard]] Suggestion get(const ObjectId& id) const;

    /**
     * Applies the suggestion's action. Throws UnknownSuggestion, WrongState
     * (not pending), StaleSuggestion (target changed or `client_revision`
     * older than the suggestion) or the dispatch error.
     */
    json accept(const ObjectId& id, Project& project, ToolDispatcher& dispatcher,
                std::optional<std::int64_t> client_revision = std::nullopt);

    /// Throws UnknownSuggestion or WrongState.
    void dismiss(const ObjectId& id);

    /// Dismisses pending suggestions whose target no longer matches; returns their ids.
    std::vector<ObjectId> invalidate_stale(const Project& project);

    /// Drops pending suggestions of `kind` on `clip` (before recomputing them).
    std::vector<ObjectId> clear_pending(const ObjectId& clip, SuggestionKind kind);

    /// Fills each line's suggestion_markers with its pending suggestion ids.
    void attach_markers(ScriptDocument& doc) const;

private:
    mutable std::mutex mutex_;
    IdGenerator ids_;
    std::vector<Suggestion> items_;
};

enum class AgentMode { Rule, Llm };

inline constexpr EnumTable<AgentMode, 2> kAgentModeNames{{{{AgentMode::Rule, "rule"}, {AgentMode::Llm, "llm"}}}};

struct PlacementProposal {
    PlacementDecision decision;
    std::string reason;
    bool fell_back = false;
    std::optional<Error> error;  // provider failure that caused the fallback
};

/**
 * @brief Text revision suggester, animation recommender and clip-placement strategist.
 *
 * Agents only read the snapshot they are given. In rule mode they are
 * deterministic and never fail on valid targets; in LLM mode they go
 * through the gateway.
 */
class InlineAgents {
public:
    InlineAgents(AgentMode mode, std::shared_ptr<Gateway> gateway = nullptr);

    [[nodiscard]] AgentMode mode() const { return mode_; }

    SemanticFeatures analyze(const Project& snapshot, const std::string& line_text) const;

    /// Throws UnknownClip, NotTextClip, ProviderError.
    std::vector<Suggestion> suggest_text_revisions(const Project& snapshot, const ObjectId& clip) const;

    /// Throws UnknownClip, NotTextClip, ProviderError, UnknownPreset.
    Suggestion recommend_animation(const Project& snapshot, const ObjectId& clip) const;

    /// Provider failures fall back to sequential placement. Throws InvalidAnchor.
    PlacementProposal propose_clip_placement(const Project& snapshot, const std::string& new_line_text,
                                             const LineAnchor& anchor) const;

private:
    AgentMode mode_;
    std::shared_ptr<Gateway> gateway_;
};

/// Rule-mode text revision: trims, collapses whitespace runs and drops spaces before punctuation.
std::string normalize_whitespace(const std::string& text);

/// Records a placement fallback in the operation log (actor inline_agent).
void log_placement_fallback(Project& project, const PlacementProposal& proposal, std::int64_t timestamp_ms);

}  // namespace tae
