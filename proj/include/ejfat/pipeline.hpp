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
#include <variant>

#include "ejfat/calendar.hpp"
#include "ejfat/discard.hpp"
#include "ejfat/lb_header.hpp"
#include "ejfat/packet.hpp"
#include "ejfat/tables.hpp"

namespace ejfat {

/// Frame mode runs all five tables. Socket mode has no link layer, so the
/// L2 filter is skipped and the L3 filter keys on the local address the
/// datagram was received on.
enum class PipelineMode : std::uint8_t { Frame, Socket };

/// base + (entropy & (2^width - 1)).
constexpr std::uint16_t entropy_port(std::uint16_t base, unsigned width, std::uint16_t entropy) noexcept {
  const std::uint32_t mask = width >= 16 ? 0xffffu : ((1u << width) - 1u);
  return static_cast<std::uint16_t>(base + (entropy & mask));
}

/// Epoch for an event number, or nullptr when the instance has no covering
/// prefix.
inline const EpochId* lpm_lookup(const PipelineTables& t, InstanceId inst, std::uint64_t event_number) noexcept {
  if (inst >= kMaxInstances) return nullptr;
  return t.epoch_assignment[inst].lookup(event_number);
}

struct Forwarded {
  ForwardedPacket packet;
  InstanceId instance = 0;
  EpochId epoch = 0;
  MemberId member = 0;
  LbHeader header;
};

using PipelineResult = std::variant<Forwarded, Discard>;

/// The per-packet forwarding decision. Reads only `pkt` and `t`.
inline PipelineResult process_packet(const PacketView& pkt, const PipelineTables& t,
                                     PipelineMode mode = PipelineMode::Socket) noexcept {
  ForwardedPacket out;
  const std::uint16_t in_port = pkt.link ? pkt.link->input_port : 0;

  if (mode == PipelineMode::Frame) {
    if (!pkt.link) return Discard{DiscardReason::L2Reject};
    const L2Value* l2 = t.find_l2(in_port, pkt.link->dst_mac);
    if (!l2) return Discard{DiscardReason::L2Reject};
    out.src_mac = l2->lb_src_mac;
  }

  const L3Value* l3 = t.find_l3(in_port, pkt.dst.addr);
  if (!l3) return Discard{DiscardReason::L3Reject};
  if (pkt.dst.port != t.service_port) return Discard{DiscardReason::NotLbPort};

  auto decoded = decode_lb_header(pkt.udp_payload, t.expected_version);
  if (auto* d = std::get_if<Discard>(&decoded)) return *d;
  const LbHeader& h = std::get<LbHeader>(decoded);

  const EpochId* epoch = lpm_lookup(t, l3->instance, h.event_number);
  if (!epoch) return Discard{DiscardReason::NoEpoch};

  const Calendar* cal = t.find_calendar(l3->instance, *epoch);
  if (!cal) return Discard{DiscardReason::NoEpoch};
  const MemberId member = (*cal)[slot_of(h.event_number)];
  if (member == kNoMember) return Discard{DiscardReason::EmptySlot};

  const MemberRewrite* rw = t.find_member(l3->instance, pkt.dst.addr.family(), member);
  if (!rw) return Discard{DiscardReason::NoRewrite};

  out.dst_mac = rw->next_hop_mac;
  out.src = Endpoint{l3->lb_src_ip, pkt.src.port};
  out.dst = Endpoint{rw->cn_ip, entropy_port(rw->udp_base_port, rw->entropy_bits, h.entropy)};
  out.payload = pkt.udp_payload.subspan(kLbHeaderSize);
  return Forwarded{out, l3->instance, *epoch, member, h};
}

/// process_packet plus counter accounting.
inline PipelineResult process_and_count(const PacketView& pkt, const PipelineTables& t, Counters& c,
                                        PipelineMode mode = PipelineMode::Socket) noexcept {
  c.count_in();
  auto r = process_packet(pkt, t, mode);
  if (auto* d = std::get_if<Discard>(&r))
    c.count_discard(d->reason);
  else
    c.count_out();
  return r;
}

}  // namespace ejfat
