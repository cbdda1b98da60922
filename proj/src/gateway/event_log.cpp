#include "groundbot/gateway/event_log.hpp"

#include <json.hpp>

#include "groundbot/core/errors.hpp"

namespace groundbot::gateway {

namespace {

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

std::string StreamEvent::to_json() const {
  nlohmann::ordered_json j;
  j["seq"] = seq;
  j["kind"] = kind;
  j["payload"] = nlohmann::json::parse(payload);
  j["ts"] = ts;
  return j.dump();
}

std::string StreamEvent::to_sse() const {
  return "id: " + std::to_string(seq) + "\nevent: " + kind + "\ndata: " + to_json() + "\n\n";
}

EventLog::EventLog(std::size_t capacity, Clock clock) : capacity_(capacity), clock_(std::move(clock)) {
  if (capacity_ == 0) throw PreconditionError("event log capacity must be positive");
  if (!clock_) clock_ = now_seconds;
}

std::uint64_t EventLog::append(std::string kind, std::string payload) {
  std::uint64_t seq;
  {
    std::lock_guard lock(mutex_);
    seq = next_++;
    events_.push_back({seq, std::move(kind), std::move(payload), clock_()});
    if (events_.size() > capacity_) events_.pop_front();
  }
  cv_.notify_all();
  return seq;
}

EventBatch EventLog::since_locked(std::uint64_t after) const {
  EventBatch batch;
  if (events_.empty()) return batch;
  std::uint64_t first = events_.front().seq;
  if (after + 1 < first) batch.missed = first - after - 1;
  for (const auto& e : events_) {
    if (e.seq > after) batch.events.push_back(e);
  }
  return batch;
}

EventBatch EventLog::since(std::uint64_t after) const {
  std::lock_guard lock(mutex_);
  return since_locked(after);
}

EventBatch EventLog::wait(std::uint64_t after, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || next_ - 1 > after; });
  return since_locked(after);
}

void EventLog::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool EventLog::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::uint64_t EventLog::last_seq() const {
  std::lock_guard lock(mutex_);
  return next_ - 1;
}

}  // namespace groundbot::gateway
