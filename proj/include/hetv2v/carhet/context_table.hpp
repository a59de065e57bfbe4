#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hetv2v/carhet/cis_codec.hpp"
#include "hetv2v/geometry.hpp"

namespace hetv2v {

using VehicleId = std::uint32_t;

struct NeighborEntry {
  VehicleId vehicle_id = 0;
  std::uint8_t hop_depth = 1;                 // 1 or 2
  std::optional<double> reception_time_s;     // RT, only for 1-hop rows
  double update_time_s = 0.0;                 // UT
  Vec2 position;
  std::vector<double> cbr_per_rat;

  bool operator==(const NeighborEntry&) const = default;
};

/// Own row as reported in outgoing CIS packets.
struct OwnRow {
  Vec2 position;
  std::vector<double> cbr_per_rat;
};

/// Per-vehicle store of 1-hop and 2-hop neighbor context.
class ContextTable {
 public:
  ContextTable(VehicleId self_id, std::size_t n_rat, GeoFrame frame = {});

  [[nodiscard]] VehicleId self_id() const { return self_id_; }
  [[nodiscard]] std::size_t n_rat() const { return n_rat_; }
  [[nodiscard]] const GeoFrame& geo_frame() const { return frame_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] const NeighborEntry* find(VehicleId id) const;
  [[nodiscard]] const std::unordered_map<VehicleId, NeighborEntry>& entries() const { return entries_; }

  /// Entries sorted by vehicle id.
  [[nodiscard]] std::vector<const NeighborEntry*> sorted() const;
  [[nodiscard]] std::size_t count_hop(std::uint8_t depth) const;

  /// Context acquisition: applies every row carrying a strictly newer UT.
  /// The sender's row becomes a 1-hop entry with RT = UT = now; relayed rows
  /// become 2-hop entries without RT. Rows about this vehicle are ignored.
  /// Throws DecodeError (leaving the table untouched) if a row does not
  /// carry n_rat loads.
  void ingest(const CisPacket& packet, double now);

  /// Drops every entry with UT < now - t_neigh.
  void prune(double now, double t_neigh);

  /// Context sharing: own row plus 1-hop rows (nearest first when more than
  /// kMaxCisEntries - 1 qualify). Throws ConfigError if own.cbr_per_rat has the wrong size.
  [[nodiscard]] CisPacket build_cis(const OwnRow& own, std::uint8_t flag_hops, double now,
                                    const DistanceMetric& metric = {}) const;

  /// Direct insertion, for tests and trace replay.
  void upsert(NeighborEntry entry);

  bool operator==(const ContextTable& other) const;

 private:
  VehicleId self_id_;
  std::size_t n_rat_;
  GeoFrame frame_;
  std::unordered_map<VehicleId, NeighborEntry> entries_;
};

// Functional forms.
[[nodiscard]] ContextTable ingest_cis(ContextTable table, const CisPacket& packet, double now);
[[nodiscard]] ContextTable prune_stale(ContextTable table, double now, double t_neigh);
[[nodiscard]] CisPacket build_cis(const ContextTable& table, const OwnRow& own,
                                  std::uint8_t flag_hops, double now);

}  // namespace hetv2v
