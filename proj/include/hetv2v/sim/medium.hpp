#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "hetv2v/geometry.hpp"
#include "hetv2v/radio_model.hpp"
#include "hetv2v/sim/event_queue.hpp"

namespace hetv2v {

using NodeId = std::uint32_t;
using Rng = std::mt19937_64;

/// Broadcast CSMA parameters shared by every RAT.
struct MacParams {
  int backoff_slots = 16;
  double slot_time_s = 50e-6;
  /// Data frames waiting per node beyond which new data is dropped.
  std::size_t queue_limit = 4;
  /// When set, a frame survives overlap if it is this many dB above every
  /// overlapping frame. Unset means no capture.
  std::optional<double> capture_margin_db;
  /// Node positions are re-sampled at most this often.
  double position_refresh_s = 0.005;
  /// Links whose mean power is more than this many sigmas below the weakest
  /// threshold are not evaluated.
  double tail_sigmas = 5.0;
};

enum class FrameKind : std::uint8_t { data, cis, probe };
inline constexpr std::size_t kFrameKinds = 3;

struct FrameRequest {
  FrameKind kind = FrameKind::data;
  std::size_t payload_bytes = 0;
  std::uint64_t tag = 0;
  double created_s = 0.0;
};

/// Outcome of a frame at one node. `sensed` means power >= cs threshold,
/// `strong` means power >= rx threshold.
struct LinkOutcome {
  NodeId node = 0;
  float distance_m = 0.0F;
  bool sensed = false;
  bool strong = false;
  bool delivered = false;
};

struct Frame {
  NodeId tx = 0;
  RatId rat = 0;
  FrameRequest request;
  double start_s = 0.0;
  double airtime_s = 0.0;
  /// Nodes that sensed the frame plus every node within the report radius.
  std::vector<LinkOutcome> links;
};

class MediumListener {
 public:
  virtual ~MediumListener() = default;
  /// Called when a frame goes on air; may fill in the payload size.
  virtual void on_tx_start(NodeId /*node*/, RatId /*rat*/, FrameRequest& /*request*/,
                           double /*now*/) {}
  virtual void on_tx_end(const Frame& frame, double now) = 0;
  virtual void on_drop(NodeId /*node*/, const FrameRequest& /*request*/, double /*now*/) {}
};

using PositionFn = std::function<Vec2(NodeId, double)>;

struct MediumStats {
  std::vector<std::array<std::uint64_t, kFrameKinds>> frames_per_rat;
  std::uint64_t drops = 0;
  std::uint64_t link_evaluations = 0;
};

/// Shared wireless medium: one broadcast CSMA channel per RAT, every node
/// listening on all RATs and transmitting on one at a time. Shadowing is
/// drawn independently per frame and link.
class RadioMedium {
 public:
  RadioMedium(Catalog catalog, PathlossParams params, MacParams mac, std::size_t n_nodes,
              double ring_length_m, PositionFn positions, EventQueue& queue, Rng& rng,
              MediumListener& listener, double report_radius_m = 0.0);

  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
  [[nodiscard]] const Catalog& catalog() const { return catalog_; }
  [[nodiscard]] const MacParams& mac() const { return mac_; }
  [[nodiscard]] DistanceMetric metric() const { return metric_; }

  void set_tx_rat(NodeId node, RatId rat, double now);
  [[nodiscard]] RatId tx_rat(NodeId node) const { return nodes_[node].tx_rat; }

  /// Queues a frame for transmission. Returns false if it was dropped.
  bool enqueue(NodeId node, FrameRequest request, double now);

  [[nodiscard]] static bool handles(EventType type) {
    return type == EventType::mac_attempt || type == EventType::tx_end;
  }
  void handle(const Event& event);

  /// Cumulative time (s) the channel of `rat` has been sensed busy at `node`
  /// up to `now`, own transmissions included.
  [[nodiscard]] double busy_time(NodeId node, RatId rat, double now) const;
  [[nodiscard]] bool busy(NodeId node, RatId rat) const;
  [[nodiscard]] bool transmitting(NodeId node) const { return nodes_[node].transmitting; }
  [[nodiscard]] bool has_queued(NodeId node, FrameKind kind) const;
  [[nodiscard]] std::size_t queue_length(NodeId node) const { return nodes_[node].queue.size(); }
  [[nodiscard]] const MediumStats& stats() const { return stats_; }
  [[nodiscard]] double airtime(RatId rat, std::size_t payload_bytes) const;
  [[nodiscard]] double cutoff_range_m(RatId rat) const { return rat_state_[rat].cutoff_m; }

 private:
  struct Reception {
    std::uint32_t slot;
    double power_dbm;
    bool corrupted;
  };
  struct Channel {  // per (node, rat)
    int busy_count = 0;
    double busy_since = 0.0;
    double busy_accum = 0.0;
    std::vector<Reception> receptions;
  };
  struct Node {
    RatId tx_rat = 0;
    bool transmitting = false;
    bool attempt_pending = false;
    int waiting_rat = -1;
    std::deque<FrameRequest> queue;
    std::size_t queued_data = 0;
  };
  struct RatState {
    double cutoff_m = 0.0;
    double weakest_threshold_dbm = 0.0;
    // P(power >= threshold) at whole meters; non-increasing, so entries
    // floor(d) and floor(d)+1 bracket the value at d.
    std::vector<double> cs_exceed;
    std::vector<double> rx_exceed;
  };

  Channel& channel(NodeId node, RatId rat) { return channels_[node * catalog_.size() + rat]; }
  const Channel& channel(NodeId node, RatId rat) const {
    return channels_[node * catalog_.size() + rat];
  }
  void refresh_positions(double now);
  void kick(NodeId node, double now);
  void schedule_attempt(NodeId node, double now);
  void on_attempt(NodeId node, double now);
  void start_tx(NodeId node, double now);
  void finish_tx(std::uint32_t slot, double now);
  void busy_up(NodeId node, RatId rat, double now);
  void busy_down(NodeId node, RatId rat, double now);
  void add_reception(NodeId node, RatId rat, std::uint32_t slot, double power_dbm);
  bool take_reception(NodeId node, RatId rat, std::uint32_t slot);

  Catalog catalog_;
  PathlossParams params_;
  MacParams mac_;
  DistanceMetric metric_;
  PositionFn position_fn_;
  EventQueue& queue_;
  Rng& rng_;
  MediumListener& listener_;
  double report_radius_m_;

  std::vector<Node> nodes_;
  std::vector<Channel> channels_;
  std::vector<RatState> rat_state_;
  std::vector<Vec2> positions_;
  double positions_time_ = -1.0;
  std::vector<Frame> frames_;
  std::vector<std::uint32_t> free_slots_;
  MediumStats stats_;
};

}  // namespace hetv2v
