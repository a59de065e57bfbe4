#include <doctest.h>

#include <random>

#include "hetv2v/carhet/context_table.hpp"
#include "hetv2v/error.hpp"

using namespace hetv2v;

namespace {

constexpr std::size_t kRats = 3;

CisEntry row(std::uint32_t id, double ut, const Vec2& pos, std::vector<double> cbr, const GeoFrame& frame = {}) {
  CisEntry e;
  e.vehicle_id = id;
  e.ut_ms = quantize_time_ms(ut);
  const auto g = frame.to_fixed(pos);
  e.lat_e7 = g.lat_e7;
  e.lon_e7 = g.lon_e7;
  for (double c : cbr) e.cbr.push_back(quantize_cbr(c));
  return e;
}

NeighborEntry one_hop(std::uint32_t id, double ut, Vec2 pos = {}) {
  NeighborEntry e;
  e.vehicle_id = id;
  e.hop_depth = 1;
  e.reception_time_s = ut;
  e.update_time_s = ut;
  e.position = pos;
  e.cbr_per_rat.assign(kRats, 0.1);
  return e;
}

}  // namespace

TEST_CASE("ingest: sender at hop 1, relayed rows at hop 2") {
  ContextTable a(1, kRats);
  CisPacket p;
  p.sender_id = 2;  // B
  p.entries = {row(2, 9.9, {10, 0}, {0.1, 0.2, 0.3}), row(4, 9.5, {300, 4}, {0.4, 0.5, 0.6})};
  a.ingest(p, 10.0);
  REQUIRE(a.size() == 2);

  const auto* b = a.find(2);
  REQUIRE(b != nullptr);
  CHECK(b->hop_depth == 1);
  REQUIRE(b->reception_time_s.has_value());
  CHECK(*b->reception_time_s == 10.0);
  CHECK(b->update_time_s == 10.0);
  CHECK(b->cbr_per_rat[2] == dequantize_cbr(quantize_cbr(0.3)));
  CHECK(std::abs(b->position.x - 10.0) < 0.02);

  const auto* d = a.find(4);
  REQUIRE(d != nullptr);
  CHECK(d->hop_depth == 2);
  CHECK_FALSE(d->reception_time_s.has_value());
  CHECK(d->update_time_s == 9.5);
  CHECK(a.count_hop(1) == 1);
  CHECK(a.count_hop(2) == 1);
}

TEST_CASE("ingest ignores stale rows and the receiver's own row") {
  ContextTable a(1, kRats);
  NeighborEntry d = one_hop(4, 9.5);
  d.hop_depth = 2;
  d.reception_time_s.reset();
  a.upsert(d);

  CisPacket p;
  p.sender_id = 2;
  p.entries = {row(2, 9.9, {}, {0, 0, 0}), row(4, 9.5, {50, 0}, {1, 1, 1}), row(1, 9.9, {}, {1, 1, 1})};
  a.ingest(p, 10.0);
  CHECK(a.find(4)->update_time_s == 9.5);
  CHECK(a.find(4)->cbr_per_rat[0] == 0.1);  // equal UT: untouched
  CHECK(a.find(1) == nullptr);

  p.entries[1] = row(4, 9.4, {50, 0}, {1, 1, 1});
  a.ingest(p, 10.1);
  CHECK(a.find(4)->cbr_per_rat[0] == 0.1);  // older UT: untouched
}

TEST_CASE("ingest rejects rows of the wrong width without touching the table") {
  ContextTable a(1, kRats);
  CisPacket p;
  p.sender_id = 2;
  p.entries = {row(2, 1.0, {}, {0.1, 0.2, 0.3}), row(3, 1.0, {}, {0.1})};
  CHECK_THROWS_AS(a.ingest(p, 1.0), DecodeError);
  CHECK(a.empty());
}

TEST_CASE("ingest is idempotent") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    ContextTable a(0, kRats);
    for (int k = 0; k < 5; ++k) {
      CisPacket p;
      p.sender_id = 1 + static_cast<std::uint32_t>(rng() % 10);
      const double now = 10.0 + k;
      p.entries.push_back(row(p.sender_id, now - 0.01, {u(rng) * 500, 0}, {u(rng), u(rng), u(rng)}));
      for (int r = 0; r < 4; ++r) {
        p.entries.push_back(row(static_cast<std::uint32_t>(rng() % 12), now - u(rng), {u(rng) * 500, 4},
                                {u(rng), u(rng), u(rng)}));
      }
      a.ingest(p, now);
      const ContextTable once = a;
      a.ingest(p, now);
      REQUIRE(a == once);
    }
  }
}

TEST_CASE("prune removes entries older than T_neigh") {
  ContextTable a(0, kRats);
  a.upsert(one_hop(1, 8.5));
  a.upsert(one_hop(2, 10.0));
  a.upsert(one_hop(3, 9.0));
  const auto pruned = prune_stale(a, 10.0, 1.0);
  CHECK(pruned.find(1) == nullptr);
  CHECK(pruned.find(2) != nullptr);
  CHECK(pruned.find(3) != nullptr);  // exactly now - T_neigh stays
  CHECK(prune_stale(ContextTable(0, kRats), 5.0, 1.0).empty());

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int t = 0; t < 200; ++t) {
    ContextTable b(0, kRats);
    for (std::uint32_t id = 1; id < 40; ++id) b.upsert(one_hop(id, u(rng)));
    const double now = u(rng);
    b.prune(now, 1.0);
    for (const auto& [id, e] : b.entries()) CHECK(e.update_time_s >= now - 1.0);
  }
}

TEST_CASE("build_cis carries the own row and 1-hop rows only") {
  ContextTable a(1, kRats);
  a.upsert(one_hop(3, 9.0));
  a.upsert(one_hop(2, 9.5));
  NeighborEntry d = one_hop(4, 9.2);
  d.hop_depth = 2;
  d.reception_time_s.reset();
  a.upsert(d);

  const OwnRow own{{5, 0}, {0.2, 0.3, 0.4}};
  const auto p = a.build_cis(own, 2, 10.0);
  REQUIRE(p.entries.size() == 3);
  CHECK(p.sender_id == 1);
  CHECK(p.flag_hops_remaining == 2);
  CHECK(p.entries[0].vehicle_id == 1);
  CHECK(p.entries[0].ut_ms == 10000);
  CHECK(p.entries[1].vehicle_id == 2);
  CHECK(p.entries[2].vehicle_id == 3);
  CHECK(p.entries[1].ut_ms == 9500);
  CHECK(cis_payload_bits(p.entries.size(), kRats) == 8 + 3 * (96 + 24));

  const auto alone = ContextTable(1, kRats).build_cis(own, 0, 3.0);
  REQUIRE(alone.entries.size() == 1);
  CHECK(alone.entries[0].vehicle_id == 1);
  CHECK_THROWS_AS((void)a.build_cis(OwnRow{{}, {0.1}}, 0, 1.0), ConfigError);

  // Five RATs, three 1-hop rows: 544 payload bits plus the header byte.
  ContextTable five(1, 5);
  for (std::uint32_t id = 2; id <= 4; ++id) {
    auto e = one_hop(id, 1.0);
    e.cbr_per_rat.assign(5, 0.0);
    five.upsert(e);
  }
  const auto p5 = five.build_cis(OwnRow{{}, std::vector<double>(5, 0.0)}, 0, 1.0);
  CHECK(cis_payload_bits(p5.entries.size(), 5) == 544 + 8);
}

TEST_CASE("build_cis keeps the nearest 1-hop rows when over capacity") {
  ContextTable a(0, kRats);
  for (std::uint32_t id = 1; id <= 100; ++id) a.upsert(one_hop(id, 1.0, {static_cast<double>(id) * 10.0, 0}));
  const auto p = a.build_cis(OwnRow{{0, 0}, {0, 0, 0}}, 0, 1.0);
  REQUIRE(p.entries.size() == kMaxCisEntries);
  for (std::size_t i = 1; i < p.entries.size(); ++i) CHECK(p.entries[i].vehicle_id == i);
  CHECK_NOTHROW((void)encode_cis(p, kRats));
}

TEST_CASE("1-hop rows transfer through the wire to hop depth 2") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    ContextTable b(2, kRats);
    const double now = 50.0 + u(rng);
    const std::size_t n = rng() % 20;
    for (std::size_t k = 0; k < n; ++k) {
      // Rows as they would be after an earlier ingest: already on the wire grid.
      CisPacket hello;
      hello.sender_id = static_cast<std::uint32_t>(10 + k);
      hello.entries = {row(hello.sender_id, now - 1.0, {u(rng) * 1000, 4.0 * (rng() % 4)}, {u(rng), u(rng), u(rng)})};
      b.ingest(hello, std::floor((now - u(rng) * 0.5) * 1000.0) / 1000.0);
    }
    const auto packet = b.build_cis(OwnRow{{100, 0}, {u(rng), u(rng), u(rng)}}, 0, now);
    const auto wire = encode_cis(packet, kRats);
    ContextTable a(1, kRats);
    a.ingest(decode_cis(wire, kRats), now + 0.001);

    REQUIRE(a.size() == b.size() + 1);
    for (const auto& [id, src] : b.entries()) {
      const auto* dst = a.find(id);
      REQUIRE(dst != nullptr);
      CHECK(dst->hop_depth == 2);
      CHECK_FALSE(dst->reception_time_s.has_value());
      CHECK(dst->update_time_s == src.update_time_s);
      CHECK(dst->position == src.position);
      CHECK(dst->cbr_per_rat == src.cbr_per_rat);
    }
    CHECK(a.find(2)->hop_depth == 1);
  }
}
