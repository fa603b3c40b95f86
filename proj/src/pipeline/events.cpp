#include "speech3d/pipeline/events.hpp"

#include <algorithm>

namespace speech3d::pipeline {

std::int64_t unix_millis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

nlohmann::json Event::to_json() const {
  return {{"seq", seq}, {"type", type}, {"at_ms", at_ms}, {"data", data}};
}

// ---- subscription ----------------------------------------------------------

void Subscription::push(const Event& e) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    if (queue_.size() >= capacity_) {
      gap_last_seq_ = queue_.front().seq;
      queue_.pop_front();
      ++pending_gap_;
      ++dropped_total_;
    }
    queue_.push_back(e);
  }
  cv_.notify_one();
}

void Subscription::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::optional<Event> Subscription::pop_locked() {
  if (pending_gap_ > 0) {
    // The marker takes the seq of the last lost event so numbering stays increasing.
    Event gap;
    gap.seq = gap_last_seq_;
    gap.type = "gap";
    gap.at_ms = unix_millis();
    gap.data = {{"missed", pending_gap_}, {"resume_seq", queue_.empty() ? gap_last_seq_ + 1 : queue_.front().seq}};
    pending_gap_ = 0;
    return gap;
  }
  if (queue_.empty()) return std::nullopt;
  Event e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

std::optional<Event> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || pending_gap_ > 0 || !queue_.empty(); });
  return pop_locked();
}

std::vector<Event> Subscription::drain() {
  std::lock_guard lock(mutex_);
  std::vector<Event> out;
  while (auto e = pop_locked()) out.push_back(std::move(*e));
  return out;
}

bool Subscription::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::size_t Subscription::dropped_total() const {
  std::lock_guard lock(mutex_);
  return dropped_total_;
}

// ---- bus -------------------------------------------------------------------

EventBus::~EventBus() { close_all(); }

std::uint64_t EventBus::publish(const std::string& type, nlohmann::json data) {
  std::vector<std::shared_ptr<Subscription>> live;
  Event e;
  {
    std::lock_guard lock(mutex_);
    e.seq = next_seq_++;
    e.type = type;
    e.at_ms = unix_millis();
    e.data = std::move(data);
    history_.push_back(e);
    if (history_.size() > history_limit_) history_.pop_front();
    // Pushing under the bus lock keeps every subscriber's order equal to seq order.
    auto it = subs_.begin();
    while (it != subs_.end()) {
      if (auto s = it->lock()) {
        s->push(e);
        ++it;
      } else {
        it = subs_.erase(it);
      }
    }
  }
  return e.seq;
}

std::shared_ptr<Subscription> EventBus::subscribe(std::uint64_t after_seq, std::size_t capacity) {
  auto sub = std::make_shared<Subscription>(capacity);
  std::lock_guard lock(mutex_);
  for (const auto& e : history_)
    if (e.seq > after_seq) sub->push(e);
  subs_.push_back(sub);
  return sub;
}

void EventBus::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mutex_);
  subs_.erase(std::remove_if(subs_.begin(), subs_.end(),
                             [&](const std::weak_ptr<Subscription>& w) {
                               auto s = w.lock();
                               return !s || s == sub;
                             }),
              subs_.end());
  sub->close();
}

std::vector<Event> EventBus::history(std::uint64_t after_seq) const {
  std::lock_guard lock(mutex_);
  std::vector<Event> out;
  for (const auto& e : history_)
    if (e.seq > after_seq) out.push_back(e);
  return out;
}

std::uint64_t EventBus::last_seq() const {
  std::lock_guard lock(mutex_);
  return next_seq_ - 1;
}

void EventBus::close_all() {
  std::lock_guard lock(mutex_);
  for (auto& w : subs_)
    if (auto s = w.lock()) s->close();
  subs_.clear();
}

}  // namespace speech3d::pipeline
