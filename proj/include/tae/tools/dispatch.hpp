#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tae/core/meta.hpp"
#include "tae/core/project.hpp"

namespace tae {

enum class ToolVerb { Create, Update, Delete, Query };
enum class ToolMode { Single, Batch, Query };

inline constexpr EnumTable<ToolVerb, 4> kToolVerbNames{{{{ToolVerb::Create, "create"},
                                                        {ToolVerb::Update, "update"},
                                                        {ToolVerb::Delete, "delete"},
                                                        {ToolVerb::Query, "query"}}}};
inline constexpr EnumTable<ToolMode, 3> kToolModeNames{
    {{{ToolMode::Single, "single"}, {ToolMode::Batch, "batch"}, {ToolMode::Query, "query"}}}};

/**
 * @brief A function-calling tool derived from one registry class.
 *
 * Names follow "<verb>_<class>" with a "_batch" suffix for batch mode.
 * Batch tools take {items: [...]} where each item matches the single
 * tool's parameters.
 */
struct ToolDescriptor {
    std::string name;
    std::string target_class;
    ToolVerb verb = ToolVerb::Query;
    ToolMode mode = ToolMode::Single;
    json parameter_schema;
    std::string description;

    bool operator==(const ToolDescriptor&) const = default;
};

/// Seven tools per class (create/update/delete/query single, create/update/delete batch), sorted by name.
std::vector<ToolDescriptor> derive_tools(const MetaRegistry& registry);

/// {"type":"function","function":{name, description, parameters}}
json tool_function_schema(const ToolDescriptor& tool);
json tools_document(const std::vector<ToolDescriptor>& tools);

struct BatchError {
    std::size_t index = 0;
    Error error;
};

struct BatchResult {
    std::size_t applied = 0;
    bool rolled_back = false;
    std::optional<BatchError> first_error;
};

json batch_result_to_json(const BatchResult& result);

/**
 * @brief Validates tool invocations and applies them to a project.
 *
 * Every call (successful or not) appends exactly one operation-log entry.
 * Errors are rethrown after logging.
 */
class ToolDispatcher {
public:
    using Clock = std::function<std::int64_t()>;

    explicit ToolDispatcher(const MetaRegistry& registry, Clock clock = {});

    [[nodiscard]] const std::vector<ToolDescriptor>& tools() const { return tools_; }
    [[nodiscard]] const ToolDescriptor* find(std::string_view name) const;
    [[nodiscard]] const MetaRegistry& registry() const { return registry_; }

    /// Throws UnknownTool or SchemaViolation.
    void validate(const std::string& tool, const json& args) const;

    /// Single or query tool; a batch tool name routes to dispatch_batch with args.items.
    json dispatch(Project& project, const std::string& tool, const json& args, Actor actor);

    /**
     * All-or-nothing: on the first failing item the project is restored to
     * its pre-batch state and one error entry is logged.
     */
    BatchResult dispatch_batch(Project& project, const std::string& tool, const std::vector<json>& items, Actor actor);

private:
    json execute(Project& project, const ToolDescriptor& tool, const json& args) const;
    std::int64_t now() const;

    const MetaRegistry& registry_;
    Clock clock_;
    std::vector<ToolDescriptor> tools_;
};

}  // namespace tae
