#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "tae/chat/orchestrator.hpp"
#include "tae/core/serialize.hpp"

namespace tae {

/// A project as kept on disk: the document plus its chat sessions.
struct StoredProject {
    Project project;
    std::vector<ChatSession> sessions;
};

json store_document(const Project& project, const std::vector<ChatSession>& sessions);
/// Throws CorruptDocument, UnsupportedSchemaVersion, DanglingReference.
StoredProject parse_store_document(const json& doc, const MetaRegistry* registry = nullptr);

/// Writes `data` to a sibling temp file, syncs it and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view data);

/// True for "proj_" followed by 8 base32 characters.
bool project_id_well_formed(std::string_view id);

/**
 * @brief Directory of project files, one "<project_id>.tae.json" each.
 *
 * Asset bytes live under assets/<asset_id>. Saves replace files
 * atomically, so a crash mid-save leaves the previous version.
 */
class ProjectStore {
public:
    explicit ProjectStore(std::filesystem::path root);

    [[nodiscard]] const std::filesystem::path& root() const { return root_; }
    [[nodiscard]] std::filesystem::path project_path(const ObjectId& id) const;
    [[nodiscard]] std::filesystem::path asset_path(const ObjectId& id) const;

    void save(const Project& project, const std::vector<ChatSession>& sessions = {}) const;
    /// Throws UnknownProject or a document error.
    [[nodiscard]] StoredProject load(const ObjectId& id, const MetaRegistry* registry = nullptr) const;
    [[nodiscard]] bool exists(const ObjectId& id) const;
    /// Ids of every stored project, sorted.
    [[nodiscard]] std::vector<ObjectId> list() const;
    void remove(const ObjectId& id) const;

private:
    std::filesystem::path root_;
};

}  // namespace tae
