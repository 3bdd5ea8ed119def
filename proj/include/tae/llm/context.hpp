#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "tae/core/project.hpp"

namespace tae {

/**
 * @brief Read-only agent input assembled from one project snapshot.
 *
 * `live_ids` lists every object id present at `revision`; provider output
 * that names objects is checked against it.
 */
struct AgentContext {
    std::int64_t revision = 0;
    json dialog = json::array();             // [{role, text}]
    json timeline_elements = json::object();
    json text_content = json::array();       // [{clip_id, text}]
    json operation_log = json::array();
    json assets = json::array();
    json task = json::object();              // agent-specific inputs (target line, anchor, feedback)
    std::set<std::string> live_ids;

    bool operator==(const AgentContext&) const = default;
};

/// Builds a context from `project`; `dialog` is copied verbatim.
AgentContext build_context(const Project& project, json dialog = json::array());

/// Short human label for an object ("clip 'Hello' on Titles"), used in selectors.
std::string describe_object(const Project& project, const ObjectId& id);

}  // namespace tae
