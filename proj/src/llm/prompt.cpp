#include <deque>

#include "tae/agents/semantics.hpp"
#include "tae/core/utf8.hpp"
#include "tae/llm/gateway.hpp"
#include "tae/timeline/presets.hpp"

namespace tae {

namespace {

// Clip text inside the timeline summary is clipped; the full text lives in the script section.
constexpr std::size_t kTimelineSnippetChars = 40;

std::string_view system_text(TemplateId id) {
    switch (id) {
        case TemplateId::IntentComprehension:
            return "You are the chat agent of a text animation editor. Read the user's request and the editor state, "
                   "then plan exactly one next step: call one of the provided tools, call the clarify tool when the "
                   "request is ambiguous, or reply with plain text when the request is complete.";
        case TemplateId::SemanticMatching:
            return "You match script lines to animations. Judge the line's importance in [0,1] and its tone, then "
                   "follow the mapping table to pick a preset from the catalog. Reply with a JSON object.";
        case TemplateId::ElementModification:
            return "You modify timeline elements. Translate the requested change into one call of the provided "
                   "tools using the exact parameter names and ranges of their schemas.";
        case TemplateId::TextRefinement:
            return "You refine script text. Propose replacements for the target line as a JSON object "
                   "{\"suggestions\":[{\"replacement\",\"reason\",\"range\"?}]}; every suggestion needs a reason.";
        case TemplateId::ClipStrategy:
            return "You place a new script line on the timeline. Choose one strategy: sequential_same_track, "
                   "parallel_adjusted_timing or parallel_new_track. Reply with a JSON object {\"strategy\",\"reason\"}.";
        case TemplateId::InstructionSuggestions:
            return "You suggest up to five short next instructions for the user, based on the editor state. "
                   "Reply with a JSON object {\"suggestions\":[string]}.";
    }
    return "";
}

json clip_timeline_text(json timeline) {
    if (!timeline.contains("tracks")) return timeline;
    for (auto& track : timeline["tracks"]) {
        if (!track.contains("clips")) continue;
        for (auto& clip : track["clips"]) {
            if (clip.contains("text") && clip["text"].is_string()) {
                const std::string text = clip["text"].get<std::string>();
                if (utf8::length(text) > kTimelineSnippetChars) {
                    clip["text"] = utf8::substr(text, 0, kTimelineSnippetChars) + "...";
                }
            }
        }
    }
    return timeline;
}

// Keeps the newest lines whose total length fits the budget.
std::string render_script(const json& lines) {
    std::deque<std::string> kept;
    std::size_t used = 0;
    std::size_t omitted = 0;
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string line = "[" + it->value("clip_id", std::string()) + "] " + it->value("text", std::string());
        std::size_t len = utf8::length(line);
        if (omitted == 0 && used + len <= kPromptScriptChars) {
            kept.push_front(std::move(line));
            used += len + 1;
        } else if (omitted == 0 && kept.empty()) {
            // A single oversized newest line keeps its tail.
            kept.push_front(utf8::substr(line, len - kPromptScriptChars));
            used = kPromptScriptChars;
            ++omitted;
        } else {
            ++omitted;
        }
    }
    std::string out;
    if (omitted > 0) out += "(" + std::to_string(omitted) + " earlier lines omitted)\n";
    for (const auto& line : kept) out += line + "\n";
    if (kept.empty() && omitted == 0) out += "(empty)\n";
    return out;
}

std::string render_log(const json& log) {
    std::string out;
    std::size_t begin = log.size() > kPromptLogEntries ? log.size() - kPromptLogEntries : 0;
    for (std::size_t i = begin; i < log.size(); ++i) {
        const json& e = log[i];
        out += "op#" + std::to_string(e.value("seq", std::int64_t{0})) + " " + e.value("actor", std::string()) + " " +
               e.value("tool", std::string()) + " " + e.value("outcome", std::string()) + " args=" +
               e.value("args", json::object()).dump();
        std::string detail = e.value("detail", std::string());
        if (!detail.empty()) out += " detail=" + detail;
        out += "\n";
    }
    if (out.empty()) out = "(none)\n";
    return out;
}

std::string render_dialog(const json& dialog) {
    std::string out;
    for (const auto& m : dialog) {
        if (m.is_object()) {
            out += m.value("role", std::string("user")) + ": ";
            const json& text = m.contains("text") ? m["text"] : m;
            out += text.is_string() ? text.get<std::string>() : text.dump();
        } else {
            out += m.is_string() ? m.get<std::string>() : m.dump();
        }
        out += "\n";
    }
    if (out.empty()) out = "(none)\n";
    return out;
}

}  // namespace

json assemble_prompt(TemplateId template_id, const AgentContext& context) {
    std::string user;
    user += "## Timeline\n" + clip_timeline_text(context.timeline_elements).dump() + "\n\n";
    user += "## Script\n" + render_script(context.text_content) + "\n";
    user += "## Recent operations\n" + render_log(context.operation_log) + "\n";
    user += "## Assets\n" + (context.assets.empty() ? std::string("(none)") : context.assets.dump()) + "\n\n";
    user += "## Dialog\n" + render_dialog(context.dialog) + "\n";
    if (template_id == TemplateId::SemanticMatching) {
        user += std::string(kMappingSectionHeader) + "\n" + mapping_table_text();
        user += "catalog: ";
        for (const auto& p : preset_catalog()) user += std::string(p.name) + " ";
        user += "\n\n";
    }
    user += "## Task\n" + context.task.dump() + "\n";

    return {{"template", kTemplateNames.name(template_id)},
            {"revision", context.revision},
            {"messages",
             json::array({{{"role", "system"}, {"content", system_text(template_id)}},
                          {{"role", "user"}, {"content", user}}})}};
}

}  // namespace tae
