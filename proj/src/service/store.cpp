#include "tae/service/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tae {

namespace fs = std::filesystem;

json store_document(const Project& project, const std::vector<ChatSession>& sessions) {
    json doc = serialize_project(project);
    json list = json::array();
    for (const auto& s : sessions) list.push_back(session_to_json(s));
    doc["sessions"] = std::move(list);
    return doc;
}

StoredProject parse_store_document(const json& doc, const MetaRegistry* registry) {
    StoredProject out{deserialize_project(doc, registry), {}};
    if (doc.contains("sessions")) {
        if (!doc["sessions"].is_array()) throw Error(ErrorCode::CorruptDocument, "sessions must be an array");
        for (const auto& s : doc["sessions"]) out.sessions.push_back(session_from_json(s));
    }
    return out;
}

namespace {

[[noreturn]] void io_error(const std::string& what, const fs::path& path) {
    throw Error(ErrorCode::Internal, what + ": " + std::strerror(errno), {{"path", path.string()}});
}

void sync_directory(const fs::path& dir) {
    int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

std::atomic<unsigned> temp_counter{0};

}  // namespace

void atomic_write(const fs::path& path, std::string_view data) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(temp_counter++);
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) io_error("cannot create temp file", tmp);
    std::size_t written = 0;
    while (written < data.size()) {
        ssize_t n = ::write(fd, data.data() + written, data.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            ::unlink(tmp.c_str());
            io_error("write failed", tmp);
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0 || ::close(fd) != 0) {
        ::unlink(tmp.c_str());
        io_error("sync failed", tmp);
    }
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        ::unlink(tmp.c_str());
        io_error("rename failed", path);
    }
    sync_directory(path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

bool project_id_well_formed(std::string_view id) {
    if (id.size() != 13 || id.substr(0, 5) != "proj_") return false;
    for (char c : id.substr(5)) {
        if (kBase32Alphabet.find(c) == std::string_view::npos) return false;
    }
    return true;
}

ProjectStore::ProjectStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "assets", ec);
    if (ec) throw Error(ErrorCode::Internal, "cannot create data directory: " + ec.message(), {{"path", root_.string()}});
}

fs::path ProjectStore::project_path(const ObjectId& id) const { return root_ / (id.value + ".tae.json"); }

fs::path ProjectStore::asset_path(const ObjectId& id) const { return root_ / "assets" / id.value; }

void ProjectStore::save(const Project& project, const std::vector<ChatSession>& sessions) const {
    atomic_write(project_path(project.id), store_document(project, sessions).dump());
}

bool ProjectStore::exists(const ObjectId& id) const {
    return project_id_well_formed(id.value) && fs::exists(project_path(id));
}

StoredProject ProjectStore::load(const ObjectId& id, const MetaRegistry* registry) const {
    if (!exists(id)) throw Error(ErrorCode::UnknownProject, "no such project", {{"project_id", id.value}});
    std::ifstream in(project_path(id), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    json doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::CorruptDocument, "project file is not JSON", {{"project_id", id.value}});
    StoredProject out = parse_store_document(doc, registry);
    if (out.project.id != id) {
        throw Error(ErrorCode::CorruptDocument, "project file holds another project",
                    {{"project_id", id.value}, {"found", out.project.id.value}});
    }
    return out;
}

std::vector<ObjectId> ProjectStore::list() const {
    std::vector<ObjectId> out;
    constexpr std::string_view suffix = ".tae.json";
    for (const auto& entry : fs::directory_iterator(root_)) {
        std::string name = entry.path().filename().string();
        if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
        std::string id = name.substr(0, name.size() - suffix.size());
        if (project_id_well_formed(id)) out.emplace_back(id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void ProjectStore::remove(const ObjectId& id) const {
    if (!exists(id)) throw Error(ErrorCode::UnknownProject, "no such project", {{"project_id", id.value}});
    fs::remove(project_path(id));
}

}  // namespace tae
