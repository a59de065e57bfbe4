#pragma once

#include <cstdint>
#include <queue>
#include <vector>

namespace hetv2v {

enum class EventType : std::uint8_t {
  mac_attempt,
  tx_end,
  app_packet,
  cis_timer,
  evaluate,
  measure_boundary,
  window_boundary,
  probe_packet,
  background_packet,
};

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventType type = EventType::mac_attempt;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
};

/// Min-heap on (time, insertion order); equal timestamps pop FIFO.
class EventQueue {
 public:
  void push(double time, EventType type, std::uint32_t a = 0, std::uint32_t b = 0) {
    heap_.push(Event{time, next_seq_++, type, a, b});
  }
  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] double next_time() const { return heap_.top().time; }
  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time;
    ++processed_;
    return e;
  }
  [[nodiscard]] double now() const { return now_; }
  [[nodiscard]] std::uint64_t processed() const { return processed_; }

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.time != y.time ? x.time > y.time : x.seq > y.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  double now_ = 0.0;
};

}  // namespace hetv2v
