#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

namespace groundbot::gateway {

// Wire schema {seq, kind, payload, ts}. payload is a serialized JSON value.
struct StreamEvent {
  std::uint64_t seq = 0;
  std::string kind;
  std::string payload;
  double ts = 0.0;

  std::string to_json() const;
  // "id: <seq>\nevent: <kind>\ndata: <to_json()>\n\n"
  std::string to_sse() const;
};

struct EventBatch {
  std::vector<StreamEvent> events;
  // Events after the requested cursor that were already evicted; the reader
  // resumes at the oldest retained event.
  std::uint64_t missed = 0;
};

// Bounded, ordered event log for one session. Readers keep their own cursor
// (the last seq they saw), so every subscriber gets every retained event in
// append order. Sequence numbers start at 1.
class EventLog {
 public:
  using Clock = std::function<double()>;

  explicit EventLog(std::size_t capacity = 4096, Clock clock = {});

  std::uint64_t append(std::string kind, std::string payload);

  EventBatch since(std::uint64_t after) const;

  // Blocks until an event after the cursor exists, the log is closed or the
  // timeout passes.
  EventBatch wait(std::uint64_t after, std::chrono::milliseconds timeout) const;

  void close();
  bool closed() const;
  std::uint64_t last_seq() const;
  std::size_t capacity() const { return capacity_; }

 private:
  EventBatch since_locked(std::uint64_t after) const;

  std::size_t capacity_;
  Clock clock_;
  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  std::deque<StreamEvent> events_;
  std::uint64_t next_ = 1;
  bool closed_ = false;
};

}  // namespace groundbot::gateway
