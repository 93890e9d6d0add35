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
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace ejfat {

/// Why a packet was dropped by the balancer. Every drop maps to exactly one
/// reason so that input/output accounting balances.
enum class DiscardReason : std::uint8_t {
  L2Reject,
  L3Reject,
  BadMagic,
  BadVersion,
  Truncated,
  NotLbPort,
  NoEpoch,
  EmptySlot,
  NoRewrite,
};

inline constexpr std::size_t kDiscardReasonCount = 9;

inline constexpr std::array<DiscardReason, kDiscardReasonCount> kAllDiscardReasons = {
    DiscardReason::L2Reject,  DiscardReason::L3Reject,   DiscardReason::BadMagic,
    DiscardReason::BadVersion, DiscardReason::Truncated, DiscardReason::NotLbPort,
    DiscardReason::NoEpoch,   DiscardReason::EmptySlot,  DiscardReason::NoRewrite,
};

constexpr std::string_view to_string(DiscardReason r) noexcept {
  switch (r) {
    case DiscardReason::L2Reject: return "L2Reject";
    case DiscardReason::L3Reject: return "L3Reject";
    case DiscardReason::BadMagic: return "BadMagic";
    case DiscardReason::BadVersion: return "BadVersion";
    case DiscardReason::Truncated: return "Truncated";
    case DiscardReason::NotLbPort: return "NotLbPort";
    case DiscardReason::NoEpoch: return "NoEpoch";
    case DiscardReason::EmptySlot: return "EmptySlot";
    case DiscardReason::NoRewrite: return "NoRewrite";
  }
  return "Unknown";
}

struct Discard {
  DiscardReason reason;
  friend bool operator==(const Discard&, const Discard&) = default;
};

/// Plain snapshot of counter values.
struct CounterValues {
  std::uint64_t packets_in = 0;
  std::uint64_t packets_out = 0;
  std::array<std::uint64_t, kDiscardReasonCount> discards{};

  std::uint64_t discarded(DiscardReason r) const noexcept {
    return discards[static_cast<std::size_t>(r)];
  }
  std::uint64_t total_discards() const noexcept {
    std::uint64_t sum = 0;
    for (auto d : discards) sum += d;
    return sum;
  }

  CounterValues& operator+=(const CounterValues& o) noexcept {
    packets_in += o.packets_in;
    packets_out += o.packets_out;
    for (std::size_t i = 0; i < kDiscardReasonCount; ++i) discards[i] += o.discards[i];
    return *this;
  }

  friend bool operator==(const CounterValues&, const CounterValues&) = default;
};

/// Monotonic counters shared by packet workers. Relaxed ordering is enough;
/// readers only need eventually consistent totals.
class Counters {
 public:
  void count_in() noexcept { packets_in_.fetch_add(1, std::memory_order_relaxed); }
  void count_out() noexcept { packets_out_.fetch_add(1, std::memory_order_relaxed); }
  void count_discard(DiscardReason r) noexcept {
    discards_[static_cast<std::size_t>(r)].fetch_add(1, std::memory_order_relaxed);
  }

  CounterValues read() const noexcept {
    CounterValues v;
    v.packets_in = packets_in_.load(std::memory_order_relaxed);
    v.packets_out = packets_out_.load(std::memory_order_relaxed);
    for (std::size_t i = 0; i < kDiscardReasonCount; ++i)
      v.discards[i] = discards_[i].load(std::memory_order_relaxed);
    return v;
  }

 private:
  std::atomic<std::uint64_t> packets_in_{0};
  std::atomic<std::uint64_t> packets_out_{0};
  std::array<std::atomic<std::uint64_t>, kDiscardReasonCount> discards_{};
};

}  // namespace ejfat
