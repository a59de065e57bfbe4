#include "hetv2v/carhet/cis_codec.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hetv2v/error.hpp"

namespace hetv2v {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  return (std::uint32_t{in[at]} << 24) | (std::uint32_t{in[at + 1]} << 16) |
         (std::uint32_t{in[at + 2]} << 8) | std::uint32_t{in[at + 3]};
}

}  // namespace

std::vector<std::uint8_t> encode_cis(const CisPacket& packet, std::size_t n_rat) {
  if (packet.entries.size() > kMaxCisEntries) {
    throw DecodeError("CIS packet carries " + std::to_string(packet.entries.size()) +
                      " entries, limit is " + std::to_string(kMaxCisEntries));
  }
  if (packet.flag_hops_remaining > kMaxFlagHops) {
    throw DecodeError("CIS flag out of range: " + std::to_string(packet.flag_hops_remaining));
  }
  std::vector<std::uint8_t> out;
  out.reserve(cis_encoded_bytes(packet.entries.size(), n_rat));
  out.push_back(static_cast<std::uint8_t>(packet.flag_hops_remaining << 6 | packet.entries.size()));
  for (const auto& e : packet.entries) {
    if (e.cbr.size() != n_rat) {
      throw DecodeError("CIS entry for vehicle " + std::to_string(e.vehicle_id) + " carries " +
                        std::to_string(e.cbr.size()) + " loads, expected " + std::to_string(n_rat));
    }
    put_u32(out, e.ut_ms);
    put_u32(out, static_cast<std::uint32_t>(e.lat_e7));
    put_u32(out, static_cast<std::uint32_t>(e.lon_e7));
    out.insert(out.end(), e.cbr.begin(), e.cbr.end());
  }
  for (const auto& e : packet.entries) put_u32(out, e.vehicle_id);
  return out;
}

CisPacket decode_cis(std::span<const std::uint8_t> bytes, std::size_t n_rat) {
  if (bytes.empty()) throw DecodeError("empty CIS packet");
  const std::uint8_t flag = bytes[0] >> 6;
  const std::size_t count = bytes[0] & 0x3F;
  if (flag > kMaxFlagHops) throw DecodeError("CIS flag out of range: " + std::to_string(flag));
  const std::size_t expected = cis_encoded_bytes(count, n_rat);
  if (bytes.size() != expected) {
    throw DecodeError("CIS length " + std::to_string(bytes.size()) + " does not match " +
                      std::to_string(count) + " entries (" + std::to_string(expected) + " bytes)");
  }
  CisPacket packet;
  packet.flag_hops_remaining = flag;
  packet.entries.resize(count);
  std::size_t at = 1;
  for (auto& e : packet.entries) {
    e.ut_ms = get_u32(bytes, at);
    e.lat_e7 = static_cast<std::int32_t>(get_u32(bytes, at + 4));
    e.lon_e7 = static_cast<std::int32_t>(get_u32(bytes, at + 8));
    at += 12;
    e.cbr.assign(bytes.begin() + static_cast<std::ptrdiff_t>(at),
                 bytes.begin() + static_cast<std::ptrdiff_t>(at + n_rat));
    at += n_rat;
  }
  for (auto& e : packet.entries) {
    e.vehicle_id = get_u32(bytes, at);
    at += 4;
  }
  if (!packet.entries.empty()) packet.sender_id = packet.entries.front().vehicle_id;
  return packet;
}

std::uint8_t quantize_cbr(double cbr) {
  if (!(cbr > 0.0)) return 0;
  if (cbr >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::floor(cbr * 255.0 + 0.5));
}

double dequantize_cbr(std::uint8_t q) { return static_cast<double>(q) / 255.0; }

std::uint32_t quantize_time_ms(double seconds) {
  if (!(seconds > 0.0)) return 0;
  const double ms = std::floor(seconds * 1000.0 + 0.5);
  if (ms >= static_cast<double>(std::numeric_limits<std::uint32_t>::max())) {
    return std::numeric_limits<std::uint32_t>::max();
  }
  return static_cast<std::uint32_t>(ms);
}

double dequantize_time_ms(std::uint32_t ms) { return static_cast<double>(ms) / 1000.0; }

}  // namespace hetv2v
