/* Copyright 2026-present The ejfat-lb Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>

#include "ejfat/bytes.hpp"
#include "ejfat/discard.hpp"

namespace ejfat {

/// UDP destination port that identifies LB protocol traffic ('L','B').
inline constexpr std::uint16_t kLbServicePort = 0x4C42;
inline constexpr std::uint8_t kDefaultLbVersion = 1;
inline constexpr std::size_t kLbHeaderSize = 16;
inline constexpr std::size_t kMaxDatagramSize = 9000;

/// The load balancer protocol header carried at the start of every UDP
/// payload sent by a DAQ.
///
///   0      1      2        3         4..5   6..7      8..15
///   'L'    'B'    version  protocol  rsvd   entropy   event number
///
/// Multi-octet fields are big-endian. rsvd is written as zero and ignored on
/// receive; protocol is carried but never interpreted.
struct LbHeader {
  std::uint8_t version = kDefaultLbVersion;
  std::uint8_t protocol = 1;
  std::uint16_t rsvd = 0;
  std::uint16_t entropy = 0;
  std::uint64_t event_number = 0;

  friend bool operator==(const LbHeader&, const LbHeader&) = default;
};

inline void encode_lb_header(const LbHeader& h, std::span<std::uint8_t, kLbHeaderSize> out) noexcept {
  out[0] = 'L';
  out[1] = 'B';
  out[2] = h.version;
  out[3] = h.protocol;
  detail::store_be<std::uint16_t>(out, 4, h.rsvd);
  detail::store_be<std::uint16_t>(out, 6, h.entropy);
  detail::store_be<std::uint64_t>(out, 8, h.event_number);
}

inline std::array<std::uint8_t, kLbHeaderSize> encode_lb_header(const LbHeader& h) noexcept {
  std::array<std::uint8_t, kLbHeaderSize> out{};
  encode_lb_header(h, out);
  return out;
}

using LbDecodeResult = std::variant<LbHeader, Discard>;

/// Parses the first 16 octets of a UDP payload. Nothing past offset 16 is
/// read. The rsvd field is reported as zero regardless of its wire value.
inline LbDecodeResult decode_lb_header(std::span<const std::uint8_t> bytes,
                                       std::uint8_t expected_version = kDefaultLbVersion) noexcept {
  if (bytes.size() < kLbHeaderSize) return Discard{DiscardReason::Truncated};
  if (bytes[0] != 'L' || bytes[1] != 'B') return Discard{DiscardReason::BadMagic};
  if (bytes[2] != expected_version) return Discard{DiscardReason::BadVersion};
  LbHeader h;
  h.version = bytes[2];
  h.protocol = bytes[3];
  h.rsvd = 0;
  h.entropy = detail::load_be<std::uint16_t>(bytes, 6);
  h.event_number = detail::load_be<std::uint64_t>(bytes, 8);
  return h;
}

}  // namespace ejfat
