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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ejfat/lb_header.hpp"
#include "ejfat/net.hpp"

namespace ejfat {

/// Link-layer facts about a received frame. Only present in frame-level
/// operation; a socket-level receiver never sees them.
struct LinkInfo {
  std::uint16_t input_port = 0;
  MacAddress src_mac;
  MacAddress dst_mac;
  friend bool operator==(const LinkInfo&, const LinkInfo&) = default;
};

/// Non-owning view of a datagram arriving at the balancer. `udp_payload`
/// starts with the LB header.
struct PacketView {
  const LinkInfo* link = nullptr;
  Endpoint src;
  Endpoint dst;
  std::span<const std::uint8_t> udp_payload;
};

/// Datagram as sent by a DAQ: LB header followed by opaque payload.
struct DaqPacket {
  std::optional<LinkInfo> link;
  Endpoint src;
  Endpoint dst;
  std::vector<std::uint8_t> udp_payload;

  static DaqPacket make(Endpoint src, Endpoint dst, const LbHeader& h,
                        std::span<const std::uint8_t> payload) {
    DaqPacket p;
    p.src = src;
    p.dst = dst;
    p.udp_payload.resize(kLbHeaderSize + payload.size());
    encode_lb_header(h, std::span<std::uint8_t, kLbHeaderSize>(p.udp_payload.data(), kLbHeaderSize));
    std::copy(payload.begin(), payload.end(), p.udp_payload.begin() + kLbHeaderSize);
    return p;
  }

  std::span<const std::uint8_t> payload() const noexcept {
    auto all = std::span<const std::uint8_t>(udp_payload);
    return all.size() >= kLbHeaderSize ? all.subspan(kLbHeaderSize) : all.subspan(all.size());
  }

  PacketView view() const noexcept {
    return PacketView{link ? &*link : nullptr, src, dst, udp_payload};
  }
};

/// Rewritten packet leaving the balancer. The payload aliases the input
/// buffer and is valid only as long as that buffer is.
struct ForwardedPacket {
  MacAddress src_mac;
  MacAddress dst_mac;
  Endpoint src;
  Endpoint dst;
  std::span<const std::uint8_t> payload;
};

}  // namespace ejfat
