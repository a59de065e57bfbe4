#include <doctest.h>

#include <random>

#include "hetv2v/carhet/cis_codec.hpp"
#include "hetv2v/error.hpp"
#include "hetv2v/geometry.hpp"
#include "oracles.hpp"

using namespace hetv2v;

namespace {

CisPacket random_packet(std::mt19937_64& rng, std::size_t n_rat) {
  CisPacket p;
  const std::size_t n = rng() % (kMaxCisEntries + 1);
  p.flag_hops_remaining = static_cast<std::uint8_t>(rng() % 3);
  for (std::size_t i = 0; i < n; ++i) {
    CisEntry e;
    e.vehicle_id = static_cast<std::uint32_t>(rng());
    e.ut_ms = static_cast<std::uint32_t>(rng());
    e.lat_e7 = static_cast<std::int32_t>(static_cast<std::uint32_t>(rng()));
    e.lon_e7 = static_cast<std::int32_t>(static_cast<std::uint32_t>(rng()));
    for (std::size_t r = 0; r < n_rat; ++r) e.cbr.push_back(static_cast<std::uint8_t>(rng()));
    p.entries.push_back(std::move(e));
  }
  if (!p.entries.empty()) p.sender_id = p.entries.front().vehicle_id;
  return p;
}

}  // namespace

TEST_CASE("payload size follows the per-row accounting plus one header byte") {
  // Three 1-hop rows plus the own row, five RATs.
  CHECK(cis_payload_bits(4, 5) == 544 + 8);
  CHECK(oracle::cis_bits(5, 4) == 544);
  CHECK(cis_payload_bits(51, 5) == 6936 + 8);
  CHECK(cis_encoded_bytes(4, 5) == 1 + 4 * (12 + 5) + 4 * 4);
}

TEST_CASE("known encoding") {
  CisPacket p;
  p.sender_id = 0x01020304;
  p.flag_hops_remaining = 2;
  p.entries.push_back({0x01020304, 1500, -1, 0x7FFFFFFF, {0, 255}});
  const auto bytes = encode_cis(p, 2);
  const std::vector<std::uint8_t> expected = {
      0x81,                                            // flag 2, one entry
      0x00, 0x00, 0x05, 0xDC,                          // UT 1500 ms
      0xFF, 0xFF, 0xFF, 0xFF,                          // lat -1
      0x7F, 0xFF, 0xFF, 0xFF,                          // lon max
      0x00, 0xFF,                                      // loads
      0x01, 0x02, 0x03, 0x04,                          // station id
  };
  CHECK(bytes == expected);
  CHECK(decode_cis(bytes, 2) == p);
}

TEST_CASE("codec round trip under randomized fuzzing") {
  std::mt19937_64 rng(424242);
  std::size_t bytes_total = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::size_t n_rat = 1 + rng() % 8;
    const auto p = random_packet(rng, n_rat);
    const auto wire = encode_cis(p, n_rat);
    REQUIRE(wire.size() == cis_encoded_bytes(p.entries.size(), n_rat));
    const auto back = decode_cis(wire, n_rat);
    REQUIRE(back == p);
    REQUIRE(encode_cis(back, n_rat) == wire);
    bytes_total += wire.size();
  }
  CHECK(bytes_total > 0);
}

TEST_CASE("decoder rejects malformed packets") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    auto p = random_packet(rng, 5);
    auto wire = encode_cis(p, 5);
    // Truncated or padded buffers never decode.
    auto shorter = wire;
    shorter.pop_back();
    if (!shorter.empty()) CHECK_THROWS_AS((void)decode_cis(shorter, 5), DecodeError);
    auto longer = wire;
    longer.push_back(0);
    CHECK_THROWS_AS((void)decode_cis(longer, 5), DecodeError);
    // Flag value 3 is out of range.
    wire[0] |= 0xC0;
    CHECK_THROWS_AS((void)decode_cis(wire, 5), DecodeError);
  }
  CHECK_THROWS_AS((void)decode_cis(std::vector<std::uint8_t>{}, 5), DecodeError);

  CisPacket p;
  p.entries.push_back({1, 0, 0, 0, {1, 2, 3}});
  CHECK_THROWS_AS((void)encode_cis(p, 5), DecodeError);
  p.entries.assign(kMaxCisEntries + 1, CisEntry{1, 0, 0, 0, {0, 0, 0, 0, 0}});
  CHECK_THROWS_AS((void)encode_cis(p, 5), DecodeError);
  p.entries.clear();
  p.flag_hops_remaining = 3;
  CHECK_THROWS_AS((void)encode_cis(p, 5), DecodeError);
}

TEST_CASE("load and time quantizers") {
  CHECK(quantize_cbr(0.0) == 0);
  CHECK(quantize_cbr(-0.5) == 0);
  CHECK(quantize_cbr(1.0) == 255);
  CHECK(quantize_cbr(2.0) == 255);
  CHECK(quantize_cbr(0.5) == 128);  // 127.5 rounds half up
  CHECK(quantize_cbr(1.0 / 255.0) == 1);
  for (int q = 0; q < 256; ++q) {
    CHECK(quantize_cbr(dequantize_cbr(static_cast<std::uint8_t>(q))) == q);
  }
  for (double c = 0.0; c <= 1.0; c += 1e-4) CHECK(std::abs(dequantize_cbr(quantize_cbr(c)) - c) <= 0.5 / 255.0 + 1e-12);
  CHECK(quantize_time_ms(1.2345) == 1235);
  CHECK(quantize_time_ms(0.0) == 0);
  CHECK(dequantize_time_ms(1500) == 1.5);
}

TEST_CASE("geographic fixed point is stable after one quantization") {
  const GeoFrame frame;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-5000.0, 5000.0);
  for (int i = 0; i < 100000; ++i) {
    const Vec2 p{x(rng), x(rng) / 100.0};
    const auto g = frame.to_fixed(p);
    const auto q = frame.to_planar(g);
    REQUIRE(frame.to_fixed(q) == g);
    // 1e-7 degree is about 1 cm.
    CHECK(std::abs(q.x - p.x) < 0.02);
    CHECK(std::abs(q.y - p.y) < 0.02);
  }
}
