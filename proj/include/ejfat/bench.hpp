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

// Single-thread throughput of the per-packet decision path.

#include <chrono>
#include <random>

#include "ejfat/control_plane.hpp"
#include "ejfat/pipeline.hpp"

namespace ejfat {

struct BenchResult {
  std::uint64_t packets = 0;
  std::size_t packet_size = 0;
  double seconds = 0.0;
  std::uint64_t forwarded = 0;
  std::uint64_t checksum = 0;  // sum of output ports; keeps the work observable

  double packets_per_second() const noexcept { return seconds > 0 ? static_cast<double>(packets) / seconds : 0.0; }
  double gigabits_per_second() const noexcept {
    return packets_per_second() * static_cast<double>(packet_size) * 8.0 / 1e9;
  }
};

/// Runs `packets` synthetic datagrams of `packet_size` bytes (UDP payload)
/// through process_packet against a 16-member, two-epoch table.
inline BenchResult bench_pipeline(std::uint64_t packets, std::size_t packet_size = 9000,
                                  PipelineMode mode = PipelineMode::Socket, std::uint64_t seed = 1) {
  const IpAddress lb = IpAddress::v4({192, 0, 2, 1});
  const MacAddress lb_mac({0x02, 0, 0, 0, 0, 1});
  PipelineTables t;
  add_lb_address(t, 0, lb, lb_mac);
  std::vector<MemberSpec> ms;
  for (MemberId m = 0; m < 16; ++m) {
    MemberSpec s;
    s.member = m;
    s.cn_ipv4 = IpAddress::v4({10, 0, 0, static_cast<std::uint8_t>(m + 1)});
    s.udp_base_port = 20000;
    s.entropy_bits = 3;
    s.weight = 1.0 + m % 3;
    ms.push_back(s);
  }
  t = activate_epoch(EpochPlan{0, 0, 0, ms, std::nullopt}, t);
  ms.pop_back();
  t = activate_epoch(EpochPlan{0, 1, 1u << 20, ms, std::nullopt}, t);

  // A small ring of distinct packets keeps the working set in cache, which
  // is what the hardware pipeline sees as well.
  constexpr std::size_t kRing = 1024;
  std::mt19937_64 rng(seed);
  std::vector<DaqPacket> ring;
  const LinkInfo link{0, MacAddress({0x02, 9, 9, 9, 9, 9}), lb_mac};
  const std::vector<std::uint8_t> body(packet_size > kLbHeaderSize ? packet_size - kLbHeaderSize : 0, 0xab);
  for (std::size_t i = 0; i < kRing; ++i) {
    auto p = DaqPacket::make(Endpoint{IpAddress::v4({198, 51, 100, 7}), 40000}, Endpoint{lb, kLbServicePort},
                             LbHeader{kDefaultLbVersion, 1, 0, static_cast<std::uint16_t>(rng()), rng() % (2u << 20)},
                             body);
    p.link = link;
    ring.push_back(std::move(p));
  }
  std::vector<PacketView> views;
  for (const auto& p : ring) views.push_back(p.view());

  BenchResult r;
  r.packets = packets;
  r.packet_size = packet_size;
  std::uint64_t sink = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < packets; ++i) {
    const auto res = process_packet(views[i % kRing], t, mode);
    if (const auto* f = std::get_if<Forwarded>(&res)) {
      ++r.forwarded;
      sink += f->packet.dst.port;
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.checksum = sink;
  return r;
}

}  // namespace ejfat
