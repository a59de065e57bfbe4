#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hetv2v {

/// One row of a CIS packet in its wire representation.
struct CisEntry {
  std::uint32_t vehicle_id = 0;
  std::uint32_t ut_ms = 0;   // update time, milliseconds
  std::int32_t lat_e7 = 0;
  std::int32_t lon_e7 = 0;
  std::vector<std::uint8_t> cbr;  // one byte per RAT, 0..255 -> 0.0..1.0

  bool operator==(const CisEntry&) const = default;
};

/// Context Information Sharing packet. entries[0] is the sender's own row,
/// followed by one row per 1-hop neighbor.
struct CisPacket {
  std::uint32_t sender_id = 0;
  std::uint8_t flag_hops_remaining = 0;  // 0..2
  std::vector<CisEntry> entries;

  bool operator==(const CisPacket&) const = default;
};

inline constexpr std::size_t kMaxCisEntries = 63;  // 6-bit count field
inline constexpr std::uint8_t kMaxFlagHops = 2;

/// Size of the CIS payload in bits: one header byte plus, per entry,
/// 32-bit UT, 32-bit latitude, 32-bit longitude and n_rat CBR bytes.
[[nodiscard]] constexpr std::size_t cis_payload_bits(std::size_t entries, std::size_t n_rat) {
  return 8 + entries * (32 + 32 + 32 + 8 * n_rat);
}

/// Full encoded size: payload plus the 32-bit station id trailer per entry.
[[nodiscard]] constexpr std::size_t cis_encoded_bytes(std::size_t entries, std::size_t n_rat) {
  return cis_payload_bits(entries, n_rat) / 8 + 4 * entries;
}

/// Big-endian encoding:
///   header  = flag_hops_remaining << 6 | entry_count
///   entries = ut_ms:u32, lat_e7:i32, lon_e7:i32, cbr:u8[n_rat]
///   trailer = vehicle_id:u32 per entry, same order
/// Throws DecodeError (from encode too) when the packet cannot be represented.
[[nodiscard]] std::vector<std::uint8_t> encode_cis(const CisPacket& packet, std::size_t n_rat);
[[nodiscard]] CisPacket decode_cis(std::span<const std::uint8_t> bytes, std::size_t n_rat);

[[nodiscard]] std::uint8_t quantize_cbr(double cbr);
[[nodiscard]] double dequantize_cbr(std::uint8_t q);
[[nodiscard]] std::uint32_t quantize_time_ms(double seconds);
[[nodiscard]] double dequantize_time_ms(std::uint32_t ms);

}  // namespace hetv2v
