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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ejfat/bytes.hpp"
#include "ejfat/error.hpp"
#include "ejfat/lb_header.hpp"
#include "ejfat/packet.hpp"

namespace ejfat {

/// Header placed after the LB header in every data segment. The balancer
/// strips the LB header, so the event number is repeated here.
///
///   0        1      2..3            4..7         8..11          12..19
///   version  flags  data source id  byte offset  bundle length  event number
///
/// All fields big-endian. flags bit 0 marks the last segment of a bundle.
struct SegmentHeader {
  std::uint8_t re_version = 1;
  std::uint8_t flags = 0;
  std::uint16_t data_source_id = 0;
  std::uint32_t byte_offset = 0;
  std::uint32_t bundle_total_length = 0;
  std::uint64_t event_number = 0;

  static constexpr std::size_t kSize = 20;
  static constexpr std::uint8_t kLastFlag = 0x01;

  bool last() const noexcept { return flags & kLastFlag; }

  friend bool operator==(const SegmentHeader&, const SegmentHeader&) = default;
};

inline void encode_segment_header(const SegmentHeader& h, std::span<std::uint8_t> out) noexcept {
  out[0] = h.re_version;
  out[1] = h.flags;
  detail::store_be<std::uint16_t>(out, 2, h.data_source_id);
  detail::store_be<std::uint32_t>(out, 4, h.byte_offset);
  detail::store_be<std::uint32_t>(out, 8, h.bundle_total_length);
  detail::store_be<std::uint64_t>(out, 12, h.event_number);
}

inline std::optional<SegmentHeader> decode_segment_header(std::span<const std::uint8_t> in) noexcept {
  if (in.size() < SegmentHeader::kSize) return std::nullopt;
  SegmentHeader h;
  h.re_version = in[0];
  h.flags = in[1];
  h.data_source_id = detail::load_be<std::uint16_t>(in, 2);
  h.byte_offset = detail::load_be<std::uint32_t>(in, 4);
  h.bundle_total_length = detail::load_be<std::uint32_t>(in, 8);
  h.event_number = detail::load_be<std::uint64_t>(in, 12);
  return h;
}

struct SegmentParams {
  std::uint64_t event_number = 0;
  std::uint16_t entropy = 0;
  std::uint16_t data_source_id = 0;
  /// Space after the LB header: segment header plus data.
  std::size_t mtu_payload = 8000;
  Endpoint src;
  Endpoint dst;
};

/// Splits a bundle into LB datagrams. All segments share the event number
/// and entropy so the balancer sends them to one receiver. An empty bundle
/// still produces one (empty, last) segment.
inline std::vector<DaqPacket> segment_bundle(std::span<const std::uint8_t> bundle, const SegmentParams& p) {
  if (p.mtu_payload <= SegmentHeader::kSize)
    throw std::invalid_argument("segment_bundle: mtu_payload must exceed the segment header");
  if (kLbHeaderSize + p.mtu_payload > kMaxDatagramSize)
    throw std::invalid_argument("segment_bundle: datagram would exceed 9000 octets");
  if (bundle.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::BundleTooLarge, std::to_string(bundle.size()) + " octets");

  const std::size_t chunk = p.mtu_payload - SegmentHeader::kSize;
  const std::size_t count = bundle.empty() ? 1 : (bundle.size() + chunk - 1) / chunk;
  const LbHeader lb{kDefaultLbVersion, 1, 0, p.entropy, p.event_number};

  std::vector<DaqPacket> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t offset = i * chunk;
    const std::size_t len = std::min(chunk, bundle.size() - offset);
    SegmentHeader sh;
    sh.flags = (i + 1 == count) ? SegmentHeader::kLastFlag : 0;
    sh.data_source_id = p.data_source_id;
    sh.byte_offset = static_cast<std::uint32_t>(offset);
    sh.bundle_total_length = static_cast<std::uint32_t>(bundle.size());
    sh.event_number = p.event_number;

    DaqPacket pkt;
    pkt.src = p.src;
    pkt.dst = p.dst;
    pkt.udp_payload.resize(kLbHeaderSize + SegmentHeader::kSize + len);
    std::span<std::uint8_t> buf(pkt.udp_payload);
    encode_lb_header(lb, buf.first<kLbHeaderSize>());
    encode_segment_header(sh, buf.subspan(kLbHeaderSize));
    std::copy_n(bundle.begin() + static_cast<std::ptrdiff_t>(offset), len,
                buf.begin() + kLbHeaderSize + SegmentHeader::kSize);
    out.push_back(std::move(pkt));
  }
  return out;
}

}  // namespace ejfat
