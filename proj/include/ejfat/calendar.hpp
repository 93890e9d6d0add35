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
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ejfat/error.hpp"

namespace ejfat {

using MemberId = std::uint32_t;
using EpochId = std::uint32_t;
using InstanceId = std::uint8_t;

inline constexpr std::size_t kCalendarSlots = 512;
inline constexpr std::uint64_t kSlotMask = kCalendarSlots - 1;
inline constexpr std::size_t kMaxInstances = 4;
inline constexpr MemberId kNoMember = std::numeric_limits<MemberId>::max();

/// Calendar slot selected by the low 9 bits of the event number.
constexpr std::size_t slot_of(std::uint64_t event_number) noexcept {
  return static_cast<std::size_t>(event_number & kSlotMask);
}

struct Calendar {
  std::array<MemberId, kCalendarSlots> slots;

  Calendar() { slots.fill(kNoMember); }

  MemberId operator[](std::size_t slot) const noexcept { return slots[slot]; }

  bool complete() const noexcept {
    return std::none_of(slots.begin(), slots.end(), [](MemberId m) { return m == kNoMember; });
  }

  std::size_t count(MemberId m) const noexcept {
    return static_cast<std::size_t>(std::count(slots.begin(), slots.end(), m));
  }

  /// Slot counts per member, ignoring empty slots.
  std::map<MemberId, std::size_t> histogram() const {
    std::map<MemberId, std::size_t> h;
    for (MemberId m : slots)
      if (m != kNoMember) ++h[m];
    return h;
  }

  friend bool operator==(const Calendar&, const Calendar&) = default;
};

struct WeightedMember {
  MemberId member;
  double weight;
};

/// Largest-remainder apportionment of `total` seats to `weights`, with every
/// member guaranteed at least one seat. Ties go to the earlier member.
inline std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total) {
  const std::size_t n = weights.size();
  if (n == 0) throw Error(ErrorCode::EmptyMemberSet, "no members to apportion");
  if (n > total) throw Error(ErrorCode::TooManyMembers, std::to_string(n) + " members");
  double sum = 0;
  for (double w : weights) {
    if (!(w > 0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidWeight, "weights must be positive");
    sum += w;
  }

  std::vector<std::size_t> seats(n);
  std::vector<double> remainder(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double quota = static_cast<double>(total) * weights[i] / sum;
    seats[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = quota - static_cast<double>(seats[i]);
    assigned += seats[i];
  }
  // Floating point can push the floor sum one past total in pathological
  // cases; trim from the smallest remainders first.
  while (assigned > total) {
    std::size_t victim = n;
    for (std::size_t i = 0; i < n; ++i)
      if (seats[i] > 0 && (victim == n || remainder[i] < remainder[victim])) victim = i;
    --seats[victim];
    remainder[victim] += 1.0;
    --assigned;
  }

  // Remainders are compared after rounding to 2^-32 so that ties which are
  // exact in rational arithmetic stay ties and fall back to input order.
  std::vector<std::int64_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[i] = std::llround(std::ldexp(remainder[i], 32));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rank[a] > rank[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % n, ++assigned) ++seats[order[k]];

  // Floor of one seat, taken from the currently largest holder.
  for (std::size_t i = 0; i < n; ++i) {
    if (seats[i] != 0) continue;
    std::size_t donor = static_cast<std::size_t>(
        std::max_element(seats.begin(), seats.end()) - seats.begin());
    --seats[donor];
    seats[i] = 1;
  }
  return seats;
}

/// Builds a complete calendar whose slot counts follow the members' weights.
/// Slots of one member are spread out with smooth weighted round-robin
/// rather than laid down in runs.
inline Calendar build_calendar(std::span<const WeightedMember> members) {
  std::vector<double> weights;
  weights.reserve(members.size());
  std::vector<MemberId> seen;
  for (const auto& m : members) {
    if (m.member == kNoMember) throw Error(ErrorCode::InvalidMember, "reserved member id");
    if (std::find(seen.begin(), seen.end(), m.member) != seen.end())
      throw Error(ErrorCode::InvalidMember, "duplicate member " + std::to_string(m.member));
    seen.push_back(m.member);
    weights.push_back(m.weight);
  }
  const auto seats = apportion(weights, kCalendarSlots);

  Calendar cal;
  std::vector<std::int64_t> current(members.size(), 0);
  const auto total = static_cast<std::int64_t>(kCalendarSlots);
  for (std::size_t slot = 0; slot < kCalendarSlots; ++slot) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      current[i] += static_cast<std::int64_t>(seats[i]);
      if (current[i] > current[best]) best = i;
    }
    current[best] -= total;
    cal.slots[slot] = members[best].member;
  }
  return cal;
}

}  // namespace ejfat
