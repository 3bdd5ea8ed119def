#include "tae/llm/gateway.hpp"

#include <algorithm>
#include <cstdlib>

#include "tae/tools/schema.hpp"

namespace tae {

bool template_expects_tools(TemplateId id) {
    return id == TemplateId::IntentComprehension || id == TemplateId::ElementModification;
}

Error provider_error(ProviderFailure kind, const std::string& message, json detail) {
    detail["kind"] = kProviderFailureNames.name(kind);
    return Error(ErrorCode::ProviderError, message, std::move(detail));
}

namespace {

Error malformed(const std::string& message, json detail = json::object()) {
    return provider_error(ProviderFailure::MalformedOutput, message, std::move(detail));
}

std::string string_field(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_string()) throw malformed(std::string("missing string field '") + key + "'");
    return doc[key].get<std::string>();
}

}  // namespace

json response_to_json(const ProviderResponse& response) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ToolCall>) {
                json out = {{"type", "tool_call"}, {"name", r.name}, {"args", r.args}};
                if (!r.rationale.empty()) out["rationale"] = r.rationale;
                return out;
            } else if constexpr (std::is_same_v<T, AssistantText>) {
                return {{"type", "assistant_text"}, {"text", r.text}};
            } else if constexpr (std::is_same_v<T, Clarify>) {
                json c = json::array();
                for (const auto& id : r.candidates) c.push_back(id.value);
                json out = {{"type", "clarify"},
                            {"question", r.question},
                            {"candidates", c},
                            {"needed", kClarifyNeedNames.name(r.needed)}};
                if (r.target_class) out["target_class"] = *r.target_class;
                return out;
            } else {
                return {{"type", "structured"}, {"document", r.document}};
            }
        },
        response);
}

ProviderResponse response_from_json(const json& doc) {
    if (!doc.is_object()) throw malformed("response is not an object");
    std::string type = string_field(doc, "type");
    if (type == "tool_call") {
        json args = doc.contains("args") ? doc["args"] : json::object();
        if (!args.is_object()) throw malformed("tool_call args must be an object");
        std::string rationale = doc.contains("rationale") ? string_field(doc, "rationale") : std::string();
        return ToolCall{string_field(doc, "name"), std::move(args), std::move(rationale)};
    }
    if (type == "assistant_text") return AssistantText{string_field(doc, "text")};
    if (type == "clarify") {
        Clarify c;
        c.question = string_field(doc, "question");
        auto need = kClarifyNeedNames.parse(doc.value("needed", std::string("selection")));
        if (!need) throw malformed("unknown clarify need", {{"needed", doc.value("needed", json())}});
        c.needed = *need;
        if (doc.contains("candidates")) {
            if (!doc["candidates"].is_array()) throw malformed("clarify candidates must be an array");
            for (const auto& id : doc["candidates"]) {
                if (!id.is_string()) throw malformed("clarify candidate must be a string");
                c.candidates.emplace_back(id.get<std::string>());
            }
        }
        if (doc.contains("target_class")) c.target_class = string_field(doc, "target_class");
        return c;
    }
    if (type == "structured") {
        if (!doc.contains("document")) throw malformed("structured response without document");
        return Structured{doc["document"]};
    }
    throw malformed("unknown response type", {{"type", type}});
}

void validate_response(const ProviderRequest& request, const ProviderResponse& response) {
    if (const auto* call = std::get_if<ToolCall>(&response)) {
        auto it = std::find_if(request.tools.begin(), request.tools.end(),
                               [&](const ToolDescriptor& t) { return t.name == call->name; });
        if (it == request.tools.end()) throw malformed("tool not offered: " + call->name, {{"tool", call->name}});
        if (auto why = validate_schema(call->args, it->parameter_schema)) {
            throw malformed("tool arguments violate the schema: " + *why, {{"tool", call->name}});
        }
        return;
    }
    if (const auto* clarify = std::get_if<Clarify>(&response)) {
        if (clarify->question.empty()) throw malformed("clarify without a question");
        if (clarify->needed == ClarifyNeed::Selection && clarify->candidates.empty()) {
            throw malformed("selection clarify without candidates");
        }
        for (const auto& id : clarify->candidates) {
            if (!request.context.live_ids.count(id.value)) {
                throw malformed("clarify candidate is not a live object", {{"candidate", id.value}});
            }
        }
        return;
    }
    if (const auto* structured = std::get_if<Structured>(&response)) {
        if (!request.structured) throw malformed("structured output was not requested");
        if (!structured->document.is_object()) throw malformed("structured document must be an object");
        if (request.constraint) {
            const auto& c = *request.constraint;
            const json& doc = structured->document;
            if (!doc.contains(c.field) || !doc[c.field].is_string() ||
                std::find(c.allowed.begin(), c.allowed.end(), doc[c.field].get<std::string>()) == c.allowed.end()) {
                throw malformed("constrained field outside the allowed values",
                                {{"field", c.field}, {"value", doc.value(c.field, json())}, {"allowed", c.allowed}});
            }
        }
        return;
    }
    if (request.structured) throw malformed("expected a structured document");
}

ProviderResponse Gateway::complete(const ProviderRequest& request) {
    if (template_expects_tools(request.template_id) != !request.tools.empty()) {
        throw Error(ErrorCode::BadRequest, "tools must be given exactly for tool-calling templates",
                    {{"template", kTemplateNames.name(request.template_id)}});
    }
    json prompt = assemble_prompt(request.template_id, request.context);
    ProviderResponse response = provider_->complete(request, prompt);
    validate_response(request, response);
    return response;
}

MockProvider::MockProvider(std::vector<json> script) : script_(std::move(script)) {}

MockProvider::MockProvider(const std::vector<ProviderResponse>& script) {
    for (const auto& r : script) script_.push_back(response_to_json(r));
}

ProviderResponse MockProvider::complete(const ProviderRequest& request, const json& prompt) {
    json entry;
    {
        std::lock_guard lock(mutex_);
        calls_.push_back({request, prompt});
        if (next_ >= script_.size()) {
            throw provider_error(ProviderFailure::MalformedOutput, "mock script exhausted", {{"calls", calls_.size()}});
        }
        entry = script_[next_++];
    }
    if (entry.is_object() && entry.value("type", std::string()) == "error") {
        auto kind = kProviderFailureNames.parse(entry.value("kind", std::string("network")));
        throw provider_error(kind.value_or(ProviderFailure::Network), entry.value("message", std::string("scripted failure")));
    }
    return response_from_json(entry);
}

void MockProvider::push(json entry) {
    std::lock_guard lock(mutex_);
    script_.push_back(std::move(entry));
}

std::vector<MockProvider::Call> MockProvider::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::size_t MockProvider::remaining() const {
    std::lock_guard lock(mutex_);
    return script_.size() - next_;
}

HttpProviderConfig HttpProviderConfig::from_env() {
    HttpProviderConfig c;
    if (const char* v = std::getenv("TAE_LLM_BASE_URL"); v && *v) c.base_url = v;
    if (const char* v = std::getenv("TAE_LLM_MODEL"); v && *v) c.model = v;
    if (const char* v = std::getenv("TAE_LLM_API_KEY"); v && *v) c.api_key = v;
    if (const char* v = std::getenv("TAE_LLM_TIMEOUT_SECONDS"); v && *v) {
        char* end = nullptr;
        double seconds = std::strtod(v, &end);
        if (end != v && seconds > 0) c.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000));
    }
    return c;
}

bool offline_from_env() {
    const char* v = std::getenv("TAE_OFFLINE");
    return v && *v && std::string_view(v) != "0";
}

}  // namespace tae
