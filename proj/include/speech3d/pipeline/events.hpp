#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace speech3d::pipeline {

struct Event {
  std::uint64_t seq = 0;  // per session, starts at 1
  std::string type;       // status, offers, asset, placement, metrics, notice, error, gap
  std::int64_t at_ms = 0; // unix milliseconds
  nlohmann::json data;

  nlohmann::json to_json() const;
};

class EventBus;

// One consumer's view of a bus. A full buffer drops its oldest events; the next
// read then yields a "gap" event saying how many were lost.
class Subscription {
 public:
  Subscription(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  // Waits up to `timeout` for the next event. Empty on timeout or after close.
  std::optional<Event> next(std::chrono::milliseconds timeout);
  // Everything currently buffered, without waiting.
  std::vector<Event> drain();
  bool closed() const;
  std::size_t dropped_total() const;

 private:
  friend class EventBus;
  void push(const Event& e);
  void close();
  std::optional<Event> pop_locked();

  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Event> queue_;
  std::size_t pending_gap_ = 0;
  std::uint64_t gap_last_seq_ = 0;
  std::size_t dropped_total_ = 0;
  bool closed_ = false;
};

// Publishing never waits on subscribers.
class EventBus {
 public:
  explicit EventBus(std::size_t history_limit = 4096) : history_limit_(history_limit) {}
  ~EventBus();

  std::uint64_t publish(const std::string& type, nlohmann::json data);

  // Replays retained events with seq > after_seq, then follows live ones.
  std::shared_ptr<Subscription> subscribe(std::uint64_t after_seq = 0, std::size_t capacity = 256);
  void unsubscribe(const std::shared_ptr<Subscription>& sub);

  std::vector<Event> history(std::uint64_t after_seq = 0) const;
  std::uint64_t last_seq() const;
  void close_all();

 private:
  const std::size_t history_limit_;
  mutable std::mutex mutex_;
  std::uint64_t next_seq_ = 1;
  std::deque<Event> history_;
  std::vector<std::weak_ptr<Subscription>> subs_;
};

std::int64_t unix_millis();

}  // namespace speech3d::pipeline
