#include "hetv2v/carhet/context_table.hpp"

#include <algorithm>
#include <string>

#include "hetv2v/error.hpp"

namespace hetv2v {

ContextTable::ContextTable(VehicleId self_id, std::size_t n_rat, GeoFrame frame)
    : self_id_(self_id), n_rat_(n_rat), frame_(frame) {}

const NeighborEntry* ContextTable::find(VehicleId id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const NeighborEntry*> ContextTable::sorted() const {
  std::vector<const NeighborEntry*> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back(&e);
  std::sort(out.begin(), out.end(),
            [](const NeighborEntry* a, const NeighborEntry* b) { return a->vehicle_id < b->vehicle_id; });
  return out;
}

std::size_t ContextTable::count_hop(std::uint8_t depth) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [depth](const auto& kv) { return kv.second.hop_depth == depth; }));
}

void ContextTable::ingest(const CisPacket& packet, double now) {
  for (const auto& row : packet.entries) {
    if (row.cbr.size() != n_rat_) {
      throw DecodeError("CIS row for vehicle " + std::to_string(row.vehicle_id) + " carries " +
                        std::to_string(row.cbr.size()) + " loads, expected " + std::to_string(n_rat_));
    }
  }
  for (const auto& row : packet.entries) {
    if (row.vehicle_id == self_id_) continue;
    const double ut = dequantize_time_ms(row.ut_ms);
    const auto it = entries_.find(row.vehicle_id);
    if (it != entries_.end() && !(ut > it->second.update_time_s)) continue;

    NeighborEntry e;
    e.vehicle_id = row.vehicle_id;
    e.position = frame_.to_planar(GeoFixed{row.lat_e7, row.lon_e7});
    e.cbr_per_rat.resize(n_rat_);
    std::transform(row.cbr.begin(), row.cbr.end(), e.cbr_per_rat.begin(), dequantize_cbr);
    if (row.vehicle_id == packet.sender_id) {
      e.hop_depth = 1;
      e.reception_time_s = now;
      e.update_time_s = now;
    } else {
      e.hop_depth = 2;
      e.update_time_s = ut;
    }
    entries_.insert_or_assign(row.vehicle_id, std::move(e));
  }
}

void ContextTable::prune(double now, double t_neigh) {
  std::erase_if(entries_, [&](const auto& kv) { return kv.second.update_time_s < now - t_neigh; });
}

CisPacket ContextTable::build_cis(const OwnRow& own, std::uint8_t flag_hops, double now,
                                  const DistanceMetric& metric) const {
  if (own.cbr_per_rat.size() != n_rat_) {
    throw ConfigError("own row carries " + std::to_string(own.cbr_per_rat.size()) +
                      " loads, expected " + std::to_string(n_rat_));
  }
  auto to_entry = [&](VehicleId id, double ut, const Vec2& pos, const std::vector<double>& cbr) {
    CisEntry e;
    e.vehicle_id = id;
    e.ut_ms = quantize_time_ms(ut);
    const GeoFixed g = frame_.to_fixed(pos);
    e.lat_e7 = g.lat_e7;
    e.lon_e7 = g.lon_e7;
    e.cbr.resize(cbr.size());
    std::transform(cbr.begin(), cbr.end(), e.cbr.begin(), quantize_cbr);
    return e;
  };

  std::vector<const NeighborEntry*> one_hop;
  for (const auto& [id, e] : entries_) {
    if (e.hop_depth == 1) one_hop.push_back(&e);
  }
  std::sort(one_hop.begin(), one_hop.end(),
            [](const NeighborEntry* a, const NeighborEntry* b) { return a->vehicle_id < b->vehicle_id; });
  if (one_hop.size() > kMaxCisEntries - 1) {
    std::stable_sort(one_hop.begin(), one_hop.end(), [&](const NeighborEntry* a, const NeighborEntry* b) {
      return metric(a->position, own.position) < metric(b->position, own.position);
    });
    one_hop.resize(kMaxCisEntries - 1);
  }

  CisPacket packet;
  packet.sender_id = self_id_;
  packet.flag_hops_remaining = flag_hops;
  packet.entries.reserve(one_hop.size() + 1);
  packet.entries.push_back(to_entry(self_id_, now, own.position, own.cbr_per_rat));
  for (const auto* e : one_hop) {
    packet.entries.push_back(to_entry(e->vehicle_id, e->update_time_s, e->position, e->cbr_per_rat));
  }
  return packet;
}

void ContextTable::upsert(NeighborEntry entry) {
  if (entry.vehicle_id == self_id_) return;
  entries_.insert_or_assign(entry.vehicle_id, std::move(entry));
}

bool ContextTable::operator==(const ContextTable& other) const {
  return self_id_ == other.self_id_ && n_rat_ == other.n_rat_ && entries_ == other.entries_;
}

ContextTable ingest_cis(ContextTable table, const CisPacket& packet, double now) {
  table.ingest(packet, now);
  return table;
}

ContextTable prune_stale(ContextTable table, double now, double t_neigh) {
  table.prune(now, t_neigh);
  return table;
}

CisPacket build_cis(const ContextTable& table, const OwnRow& own, std::uint8_t flag_hops, double now) {
  return table.build_cis(own, flag_hops, now);
}

}  // namespace hetv2v
