#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tae/core/ids.hpp"
#include "tae/core/error.hpp"

namespace tae {

/// One server-push event. `seq` increases by one per project.
struct ServerEvent {
    std::int64_t seq = 0;
    std::string type;  // revision, suggestion, suggestion_dismissed, chat, asset
    json data = json::object();
};

/// "id: <seq>\nevent: <type>\ndata: <json>\n\n"
std::string sse_frame(const ServerEvent& event);

inline constexpr std::size_t kSubscriberBuffer = 1000;

/**
 * @brief Buffered queue of one subscriber.
 *
 * When full, the oldest event is dropped. Clients notice the gap in
 * `seq` and resynchronise with a full GET.
 */
class Subscription {
public:
    explicit Subscription(std::size_t capacity = kSubscriberBuffer) : capacity_(capacity) {}

    /// Waits up to `wait` for the next event. Empty on timeout or once closed and drained.
    std::optional<ServerEvent> next(std::chrono::milliseconds wait);
    void push(ServerEvent event);
    void close();
    [[nodiscard]] bool closed() const;
    [[nodiscard]] std::size_t dropped() const;
    [[nodiscard]] std::size_t buffered() const;

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<ServerEvent> queue_;
    std::size_t capacity_;
    std::size_t dropped_ = 0;
    bool closed_ = false;
};

/// Per-project fan-out of server events to every subscriber.
class EventHub {
public:
    std::shared_ptr<Subscription> subscribe(const ObjectId& project, std::size_t capacity = kSubscriberBuffer);
    ServerEvent publish(const ObjectId& project, std::string type, json data);
    /// Closes the project's subscriptions (project deleted).
    void close_project(const ObjectId& project);
    void close_all();
    [[nodiscard]] std::size_t subscribers(const ObjectId& project) const;

private:
    struct Channel {
        std::int64_t seq = 0;
        std::vector<std::weak_ptr<Subscription>> subs;
    };
    mutable std::mutex mutex_;
    std::map<ObjectId, Channel> channels_;
};

}  // namespace tae
