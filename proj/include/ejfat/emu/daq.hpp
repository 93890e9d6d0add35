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

// Socket-backed DAQ emulator: segments bundles and sends them to the
// balancer from one UDP source endpoint.

#include <chrono>
#include <thread>

#include "ejfat/daemon/udp.hpp"
#include "ejfat/segment.hpp"

namespace ejfat::emu {

struct DaqConfig {
  Endpoint local{IpAddress::v4({127, 0, 0, 1}), 0};
  Endpoint balancer{IpAddress::v4({127, 0, 0, 1}), kLbServicePort};
  std::uint16_t data_source_id = 0;
  std::size_t mtu_payload = 8000;
  /// Pause after every `burst` datagrams so loopback receivers keep up.
  std::size_t burst = 32;
  std::chrono::microseconds pause{200};
};

class DaqSender {
 public:
  explicit DaqSender(DaqConfig cfg) : cfg_(cfg), socket_(io::UdpSocket::bind(cfg.local)) {
    cfg_.local = socket_.local();
  }

  const Endpoint& local() const noexcept { return cfg_.local; }

  /// Returns the number of datagrams sent.
  std::size_t send_bundle(std::uint64_t event, std::uint16_t entropy, std::span<const std::uint8_t> bundle) {
    SegmentParams p;
    p.event_number = event;
    p.entropy = entropy;
    p.data_source_id = cfg_.data_source_id;
    p.mtu_payload = cfg_.mtu_payload;
    p.src = cfg_.local;
    p.dst = cfg_.balancer;
    const auto packets = segment_bundle(bundle, p);
    for (const auto& pkt : packets) send_raw(pkt.udp_payload);
    return packets.size();
  }

  /// Sends an arbitrary datagram, for malformed-input tests.
  void send_raw(std::span<const std::uint8_t> datagram) {
    socket_.send_to(datagram, cfg_.balancer);
    if (cfg_.burst && ++sent_ % cfg_.burst == 0 && cfg_.pause.count() > 0) std::this_thread::sleep_for(cfg_.pause);
  }

  std::uint64_t datagrams_sent() const noexcept { return sent_; }

 private:
  DaqConfig cfg_;
  io::UdpSocket socket_;
  std::uint64_t sent_ = 0;
};

}  // namespace ejfat::emu
