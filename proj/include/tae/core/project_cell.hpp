#pragma once

#include <memory>
#include <mutex>
#include <utility>

#include "tae/core/project.hpp"

namespace tae {

/**
 * @brief Single-writer holder for one project.
 *
 * Every mutation runs under one lock, which gives a total order over
 * concurrent writers. Readers take an immutable snapshot copy.
 */
class ProjectCell {
public:
    explicit ProjectCell(Project project) : project_(std::move(project)) {}

    template <class Fn>
    decltype(auto) mutate(Fn&& fn) {
        std::lock_guard lock(mutex_);
        return std::forward<Fn>(fn)(project_);
    }

    template <class Fn>
    decltype(auto) read(Fn&& fn) const {
        std::lock_guard lock(mutex_);
        return std::forward<Fn>(fn)(std::as_const(project_));
    }

    [[nodiscard]] std::shared_ptr<const Project> snapshot() const {
        std::lock_guard lock(mutex_);
        return std::make_shared<const Project>(project_);
    }

    [[nodiscard]] std::int64_t revision() const {
        std::lock_guard lock(mutex_);
        return project_.revision;
    }

private:
    mutable std::mutex mutex_;
    Project project_;
};

}  // namespace tae
