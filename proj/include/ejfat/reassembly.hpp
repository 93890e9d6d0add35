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
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstring>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "ejfat/segment.hpp"

namespace ejfat {

struct BundleKey {
  std::uint16_t data_source_id = 0;
  std::uint64_t event_number = 0;
  friend auto operator<=>(const BundleKey&, const BundleKey&) = default;
};

enum class ReassemblyStatus : std::uint8_t {
  Completed,
  Pending,
  Duplicate,
  CorruptSegment,
  BufferLimitExceeded,
  Expired,
  Malformed,
};

constexpr std::string_view to_string(ReassemblyStatus s) noexcept {
  switch (s) {
    case ReassemblyStatus::Completed: return "Completed";
    case ReassemblyStatus::Pending: return "Pending";
    case ReassemblyStatus::Duplicate: return "Duplicate";
    case ReassemblyStatus::CorruptSegment: return "CorruptSegment";
    case ReassemblyStatus::BufferLimitExceeded: return "BufferLimitExceeded";
    case ReassemblyStatus::Expired: return "Expired";
    case ReassemblyStatus::Malformed: return "Malformed";
  }
  return "Unknown";
}

struct ReassemblyOutcome {
  ReassemblyStatus status = ReassemblyStatus::Pending;
  BundleKey key;
  std::vector<std::uint8_t> bundle;  // set only when Completed
};

struct ReassemblyOptions {
  std::size_t max_buffered_bytes = std::size_t{256} << 20;
  std::chrono::nanoseconds timeout = std::chrono::milliseconds(500);
};

struct ReassemblyStats {
  std::uint64_t completed = 0;
  std::uint64_t expired = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t corrupt = 0;
  std::uint64_t over_limit = 0;
  std::uint64_t malformed = 0;
};

/// Rebuilds bundles from segments arriving in any order. Time is supplied by
/// the caller so the same code runs under simulated and wall-clock time.
/// One instance per receiving port; not thread safe.
class Reassembler {
 public:
  using Nanos = std::chrono::nanoseconds;

  explicit Reassembler(ReassemblyOptions opts = {}) : opts_(opts) {}

  /// Feeds one segment (segment header + data, LB header already removed).
  ReassemblyOutcome add(std::span<const std::uint8_t> segment, Nanos now) {
    ReassemblyOutcome out;
    auto hdr = decode_segment_header(segment);
    if (!hdr) {
      ++stats_.malformed;
      out.status = ReassemblyStatus::Malformed;
      return out;
    }
    out.key = BundleKey{hdr->data_source_id, hdr->event_number};
    auto data = segment.subspan(SegmentHeader::kSize);
    const std::uint64_t end = std::uint64_t{hdr->byte_offset} + data.size();
    const bool consistent = end <= hdr->bundle_total_length &&
                            hdr->last() == (end == hdr->bundle_total_length) &&
                            (!data.empty() || hdr->bundle_total_length == 0);
    if (!consistent) return corrupt(out);

    if (auto done = recent_.find(out.key); done != recent_.end()) {
      ++stats_.duplicates;
      out.status = ReassemblyStatus::Duplicate;
      return out;
    }

    auto it = pending_.find(out.key);
    if (it != pending_.end() && now > it->second.deadline) {
      drop(it);
      ++stats_.expired;
      out.status = ReassemblyStatus::Expired;
      return out;
    }
    if (it == pending_.end()) {
      if (buffered_ + hdr->bundle_total_length > opts_.max_buffered_bytes) {
        ++stats_.over_limit;
        out.status = ReassemblyStatus::BufferLimitExceeded;
        return out;
      }
      Buffer b;
      b.data.resize(hdr->bundle_total_length);
      b.deadline = now + opts_.timeout;
      buffered_ += hdr->bundle_total_length;
      it = pending_.emplace(out.key, std::move(b)).first;
    }
    Buffer& buf = it->second;
    if (buf.data.size() != hdr->bundle_total_length) return corrupt(out);

    switch (merge(buf, hdr->byte_offset, data)) {
      case Merge::Conflict:
        drop(it);
        return corrupt(out);
      case Merge::Duplicate:
        ++stats_.duplicates;
        out.status = ReassemblyStatus::Duplicate;
        return out;
      case Merge::Added:
        break;
    }
    if (buf.covered != buf.data.size()) {
      out.status = ReassemblyStatus::Pending;
      return out;
    }
    out.status = ReassemblyStatus::Completed;
    out.bundle = std::move(buf.data);
    buffered_ -= out.bundle.size();
    pending_.erase(it);
    recent_[out.key] = now + opts_.timeout;
    ++stats_.completed;
    return out;
  }

  /// Drops partial bundles whose deadline has passed. Returns their keys.
  std::vector<BundleKey> evict_expired(Nanos now) {
    std::vector<BundleKey> lost;
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (now > it->second.deadline) {
        lost.push_back(it->first);
        ++stats_.expired;
        buffered_ -= it->second.data.size();
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
    std::erase_if(recent_, [&](const auto& kv) { return now > kv.second; });
    return lost;
  }

  std::size_t buffered_bytes() const noexcept { return buffered_; }
  std::size_t pending_count() const noexcept { return pending_.size(); }
  const ReassemblyStats& stats() const noexcept { return stats_; }

 private:
  struct Buffer {
    std::vector<std::uint8_t> data;
    std::map<std::uint32_t, std::uint32_t> ranges;  // start -> end, disjoint
    std::size_t covered = 0;
    Nanos deadline{};
  };

  enum class Merge { Added, Duplicate, Conflict };

  ReassemblyOutcome& corrupt(ReassemblyOutcome& out) {
    ++stats_.corrupt;
    out.status = ReassemblyStatus::CorruptSegment;
    return out;
  }

  void drop(std::map<BundleKey, Buffer>::iterator it) {
    buffered_ -= it->second.data.size();
    pending_.erase(it);
  }

  // Overlapping bytes must agree with what was already received.
  static Merge merge(Buffer& buf, std::uint32_t offset, std::span<const std::uint8_t> data) {
    const std::uint32_t begin = offset;
    const auto end = static_cast<std::uint32_t>(offset + data.size());
    if (data.empty()) {
      // Only an empty bundle has an empty segment.
      if (buf.ranges.empty()) {
        buf.ranges.emplace(0, 0);
        return Merge::Added;
      }
      return Merge::Duplicate;
    }

    auto it = buf.ranges.upper_bound(begin);
    if (it != buf.ranges.begin()) --it;
    std::size_t overlap = 0;
    for (auto r = it; r != buf.ranges.end() && r->first < end; ++r) {
      const std::uint32_t lo = std::max(begin, r->first);
      const std::uint32_t hi = std::min(end, r->second);
      if (lo >= hi) continue;
      if (std::memcmp(buf.data.data() + lo, data.data() + (lo - begin), hi - lo) != 0) return Merge::Conflict;
      overlap += hi - lo;
    }
    if (overlap == data.size()) return Merge::Duplicate;

    std::memcpy(buf.data.data() + begin, data.data(), data.size());
    buf.covered += data.size() - overlap;

    // Coalesce with touching or overlapping neighbours.
    std::uint32_t lo = begin, hi = end;
    auto r = buf.ranges.upper_bound(begin);
    if (r != buf.ranges.begin() && std::prev(r)->second >= begin) --r;
    while (r != buf.ranges.end() && r->first <= hi) {
      lo = std::min(lo, r->first);
      hi = std::max(hi, r->second);
      r = buf.ranges.erase(r);
    }
    buf.ranges.emplace(lo, hi);
    return Merge::Added;
  }

  ReassemblyOptions opts_;
  std::map<BundleKey, Buffer> pending_;
  std::map<BundleKey, Nanos> recent_;
  std::size_t buffered_ = 0;
  ReassemblyStats stats_;
};

}  // namespace ejfat
