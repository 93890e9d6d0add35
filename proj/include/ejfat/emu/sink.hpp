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

// Socket-backed compute node: receives on a contiguous block of UDP ports,
// reassembles bundles and keeps a log of what arrived where.

#include <poll.h>

#include <atomic>
#include <bit>
#include <mutex>
#include <random>
#include <thread>

#include "ejfat/daemon/udp.hpp"
#include "ejfat/reassembly.hpp"

namespace ejfat::emu {

struct ReceivedBundle {
  BundleKey key;
  std::uint16_t port = 0;
  Endpoint from;  // source of the last segment
  std::vector<std::uint8_t> data;
};

struct SinkStats {
  std::uint64_t datagrams = 0;
  std::uint64_t completed = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t corrupt = 0;
  std::uint64_t malformed = 0;
};

class CnSink {
 public:
  /// Binds 2^entropy_bits consecutive ports starting at `base_port`.
  CnSink(const IpAddress& address, std::uint16_t base_port, std::uint8_t entropy_bits,
         ReassemblyOptions opts = {})
      : address_(address), base_port_(base_port), opts_(opts) {
    const std::size_t n = std::size_t{1} << entropy_bits;
    if (std::size_t{base_port} + n - 1 > 0xffff) throw Error(ErrorCode::BindFailure, "port range overflows");
    for (std::size_t i = 0; i < n; ++i)
      sockets_.push_back(io::UdpSocket::bind(Endpoint{address, static_cast<std::uint16_t>(base_port + i)},
                                             std::size_t{8} << 20));
    for (std::size_t i = 0; i < n; ++i) reassemblers_.emplace_back(opts_);
  }

  /// Picks a free block of ports at random.
  static std::unique_ptr<CnSink> bind_any(const IpAddress& address, std::uint8_t entropy_bits,
                                          ReassemblyOptions opts = {}) {
    std::mt19937 rng(std::random_device{}());
    std::uniform_int_distribution<unsigned> pick(20000, 60000);
    for (int attempt = 0; attempt < 100; ++attempt) {
      try {
        return std::make_unique<CnSink>(address, static_cast<std::uint16_t>(pick(rng)), entropy_bits, opts);
      } catch (const Error&) {
      }
    }
    throw Error(ErrorCode::BindFailure, "no free port block on " + address.to_string());
  }

  CnSink(const CnSink&) = delete;
  CnSink& operator=(const CnSink&) = delete;
  ~CnSink() { stop(); }

  const IpAddress& address() const noexcept { return address_; }
  std::uint16_t base_port() const noexcept { return base_port_; }
  std::uint8_t entropy_bits() const noexcept {
    return static_cast<std::uint8_t>(std::countr_zero(sockets_.size()));
  }

  void start() {
    if (thread_.joinable()) return;
    stopping_ = false;
    thread_ = std::thread([this] { loop(); });
  }

  void stop() {
    stopping_ = true;
    if (thread_.joinable()) thread_.join();
  }

  std::vector<ReceivedBundle> bundles() const {
    std::lock_guard lk(mu_);
    return bundles_;
  }

  SinkStats stats() const {
    std::lock_guard lk(mu_);
    return stats_;
  }

  std::size_t completed() const {
    std::lock_guard lk(mu_);
    return bundles_.size();
  }

 private:
  void loop() {
    std::vector<pollfd> fds;
    for (const auto& s : sockets_) fds.push_back(pollfd{s.fd(), POLLIN, 0});
    std::vector<std::uint8_t> buf(65536);
    const auto t0 = std::chrono::steady_clock::now();
    while (!stopping_) {
      if (::poll(fds.data(), fds.size(), 20) <= 0) continue;
      for (std::size_t i = 0; i < fds.size(); ++i) {
        if (!(fds[i].revents & POLLIN)) continue;
        while (auto d = sockets_[i].receive_now(buf)) {
          const auto now = std::chrono::steady_clock::now() - t0;
          auto out = reassemblers_[i].add(std::span<const std::uint8_t>(buf.data(), d->size), now);
          std::lock_guard lk(mu_);
          ++stats_.datagrams;
          switch (out.status) {
            case ReassemblyStatus::Completed:
              ++stats_.completed;
              bundles_.push_back(ReceivedBundle{out.key, static_cast<std::uint16_t>(base_port_ + i), d->src,
                                                std::move(out.bundle)});
              break;
            case ReassemblyStatus::Duplicate: ++stats_.duplicates; break;
            case ReassemblyStatus::CorruptSegment: ++stats_.corrupt; break;
            case ReassemblyStatus::Malformed: ++stats_.malformed; break;
            default: break;
          }
        }
      }
    }
  }

  IpAddress address_;
  std::uint16_t base_port_;
  ReassemblyOptions opts_;
  std::vector<io::UdpSocket> sockets_;
  std::vector<Reassembler> reassemblers_;
  mutable std::mutex mu_;
  std::vector<ReceivedBundle> bundles_;
  SinkStats stats_;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

}  // namespace ejfat::emu
