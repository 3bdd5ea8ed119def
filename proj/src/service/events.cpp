#include "tae/service/events.hpp"

#include <algorithm>

namespace tae {

std::string sse_frame(const ServerEvent& event) {
    return "id: " + std::to_string(event.seq) + "\nevent: " + event.type + "\ndata: " + event.data.dump() + "\n\n";
}

std::optional<ServerEvent> Subscription::next(std::chrono::milliseconds wait) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, wait, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    ServerEvent ev = std::move(queue_.front());
    queue_.pop_front();
    return ev;
}

void Subscription::push(ServerEvent event) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        if (queue_.size() >= capacity_) {
            queue_.pop_front();
            ++dropped_;
        }
        queue_.push_back(std::move(event));
    }
    cv_.notify_all();
}

void Subscription::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool Subscription::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

std::size_t Subscription::dropped() const {
    std::lock_guard lock(mutex_);
    return dropped_;
}

std::size_t Subscription::buffered() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

std::shared_ptr<Subscription> EventHub::subscribe(const ObjectId& project, std::size_t capacity) {
    auto sub = std::make_shared<Subscription>(capacity);
    std::lock_guard lock(mutex_);
    channels_[project].subs.push_back(sub);
    return sub;
}

ServerEvent EventHub::publish(const ObjectId& project, std::string type, json data) {
    std::vector<std::shared_ptr<Subscription>> live;
    ServerEvent ev;
    {
        std::lock_guard lock(mutex_);
        Channel& ch = channels_[project];
        ev = ServerEvent{++ch.seq, std::move(type), std::move(data)};
        ev.data["project_id"] = project.value;
        auto& subs = ch.subs;
        subs.erase(std::remove_if(subs.begin(), subs.end(), [](const auto& w) { return w.expired(); }), subs.end());
        for (const auto& w : subs) {
            if (auto s = w.lock()) live.push_back(std::move(s));
        }
        // Pushing under the hub lock keeps every subscriber's order equal to seq order.
        for (const auto& s : live) s->push(ev);
    }
    return ev;
}

void EventHub::close_project(const ObjectId& project) {
    std::lock_guard lock(mutex_);
    auto it = channels_.find(project);
    if (it == channels_.end()) return;
    for (const auto& w : it->second.subs) {
        if (auto s = w.lock()) s->close();
    }
    it->second.subs.clear();
}

void EventHub::close_all() {
    std::lock_guard lock(mutex_);
    for (auto& [id, ch] : channels_) {
        for (const auto& w : ch.subs) {
            if (auto s = w.lock()) s->close();
        }
        ch.subs.clear();
    }
}

std::size_t EventHub::subscribers(const ObjectId& project) const {
    std::lock_guard lock(mutex_);
    auto it = channels_.find(project);
    if (it == channels_.end()) return 0;
    return static_cast<std::size_t>(
        std::count_if(it->second.subs.begin(), it->second.subs.end(), [](const auto& w) { return !w.expired(); }));
}

}  // namespace tae
