#include <httplib.h>

#include "tae/llm/gateway.hpp"

namespace tae {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    std::size_t host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_begin = url.find('/', host_begin);
    SplitUrl out;
    out.origin = url.substr(0, path_begin);
    if (path_begin != std::string::npos) out.prefix = url.substr(path_begin);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

json clarify_function() {
    return {{"type", "function"},
            {"function",
             {{"name", kClarifyToolName},
              {"description",
               "Ask the user to clarify an ambiguous request. List candidate object ids when the user must pick one."},
              {"parameters",
               {{"type", "object"},
                {"properties",
                 {{"question", {{"type", "string"}}},
                  {"candidates", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                  {"needed", {{"type", "string"}, {"enum", kClarifyNeedNames.names()}}},
                  {"target_class", {{"type", "string"}}}}},
                {"required", {"question", "needed"}}}}}}};
}

Error malformed(const std::string& message) { return provider_error(ProviderFailure::MalformedOutput, message); }

}  // namespace

json HttpProvider::build_body(const ProviderRequest& request, const json& prompt) const {
    json body = {{"model", config_.model}, {"messages", prompt.at("messages")}, {"temperature", 0}};
    if (!request.tools.empty()) {
        json tools = json::array();
        for (const auto& t : request.tools) tools.push_back(tool_function_schema(t));
        tools.push_back(clarify_function());
        body["tools"] = std::move(tools);
        body["tool_choice"] = "auto";
    }
    if (request.structured) body["response_format"] = {{"type", "json_object"}};
    return body;
}

ProviderResponse HttpProvider::parse_reply(const ProviderRequest& request, const json& reply) {
    if (!reply.is_object() || !reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
        throw malformed("reply without choices");
    }
    const json& message = reply["choices"][0].value("message", json::object());
    if (message.contains("tool_calls") && message["tool_calls"].is_array() && !message["tool_calls"].empty()) {
        const json& fn = message["tool_calls"][0].value("function", json::object());
        if (!fn.contains("name") || !fn["name"].is_string()) throw malformed("tool call without a name");
        json args = json::object();
        if (fn.contains("arguments")) {
            const json& raw = fn["arguments"];
            args = raw.is_string() ? json::parse(raw.get<std::string>(), nullptr, false) : raw;
            if (args.is_discarded() || !args.is_object()) throw malformed("tool call arguments are not a JSON object");
        }
        std::string name = fn["name"].get<std::string>();
        if (name == kClarifyToolName) {
            args["type"] = "clarify";
            return response_from_json(args);
        }
        std::string rationale = message.value("content", json()).is_string() ? message["content"].get<std::string>() : "";
        return ToolCall{std::move(name), std::move(args), std::move(rationale)};
    }
    if (!message.contains("content") || !message["content"].is_string()) throw malformed("reply without content");
    std::string content = message["content"].get<std::string>();
    if (request.structured) {
        json doc = json::parse(content, nullptr, false);
        if (doc.is_discarded()) throw malformed("structured reply is not JSON");
        return Structured{std::move(doc)};
    }
    return AssistantText{std::move(content)};
}

ProviderResponse HttpProvider::complete(const ProviderRequest& request, const json& prompt) {
    SplitUrl url = split_url(config_.base_url);
    httplib::Client client(url.origin);
    auto seconds = config_.timeout.count() / 1000;
    auto micros = (config_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

    std::string body = build_body(request, prompt).dump();
    auto res = client.Post(url.prefix + "/chat/completions", body, "application/json");
    if (!res) {
        auto err = res.error();
        bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                         err == httplib::Error::ConnectionTimeout;
        throw provider_error(timed_out ? ProviderFailure::Timeout : ProviderFailure::Network,
                             "provider request failed: " + httplib::to_string(err));
    }
    if (res->status != 200) {
        throw provider_error(ProviderFailure::Network, "provider returned HTTP " + std::to_string(res->status),
                             {{"status", res->status}});
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw malformed("provider reply is not JSON");
    return parse_reply(request, reply);
}

}  // namespace tae
