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
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ejfat/calendar.hpp"
#include "ejfat/error.hpp"
#include "ejfat/lb_header.hpp"
#include "ejfat/lpm.hpp"
#include "ejfat/net.hpp"

namespace ejfat {

using EpochPrefix = Prefix<std::uint64_t>;
using EpochTrie = LpmTrie<std::uint64_t, EpochId>;

/// Input port key; an empty value matches any port.
using PortMatch = std::optional<std::uint16_t>;

struct L2Key {
  PortMatch input_port;
  MacAddress dst_mac;
  friend auto operator<=>(const L2Key&, const L2Key&) = default;
};

struct L2Value {
  MacAddress lb_src_mac;
  friend bool operator==(const L2Value&, const L2Value&) = default;
};

struct L3Key {
  PortMatch input_port;
  std::uint16_t ethertype = kEthertypeIpv4;
  IpAddress dst_ip;
  friend auto operator<=>(const L3Key&, const L3Key&) = default;
};

struct L3Value {
  IpAddress lb_src_ip;
  InstanceId instance = 0;
  friend bool operator==(const L3Value&, const L3Value&) = default;
};

struct MemberKey {
  InstanceId instance = 0;
  AddressFamily family = AddressFamily::V4;
  MemberId member = 0;
  friend auto operator<=>(const MemberKey&, const MemberKey&) = default;
};

/// Forwarding record for one member in one address family.
struct MemberRewrite {
  MacAddress next_hop_mac;
  IpAddress cn_ip;
  std::uint16_t udp_base_port = 0;
  std::uint8_t entropy_bits = 0;

  bool port_range_valid() const noexcept {
    return entropy_bits <= 16 &&
           std::uint32_t{udp_base_port} + (std::uint32_t{1} << entropy_bits) - 1 <= 0xffff;
  }

  friend bool operator==(const MemberRewrite&, const MemberRewrite&) = default;
};

struct CalendarKey {
  InstanceId instance = 0;
  EpochId epoch = 0;
  friend auto operator<=>(const CalendarKey&, const CalendarKey&) = default;
};

/// Control-plane bookkeeping kept alongside the tables so that one snapshot
/// fully describes the balancer. The data plane never reads it.
struct EpochCursor {
  EpochId current = 0;
  std::uint64_t current_start = 0;
  EpochId next_free = 0;
  friend bool operator==(const EpochCursor&, const EpochCursor&) = default;
};

/// One immutable set of match-action tables. Workers hold a shared pointer
/// to a const instance; changes are made on a copy and published whole.
struct PipelineTables {
  std::uint16_t service_port = kLbServicePort;
  std::uint8_t expected_version = kDefaultLbVersion;

  std::map<L2Key, L2Value> l2_filter;
  std::map<L3Key, L3Value> l3_filter;
  std::array<EpochTrie, kMaxInstances> epoch_assignment;
  std::map<CalendarKey, Calendar> calendars;
  std::map<MemberKey, MemberRewrite> members;
  std::array<std::optional<EpochCursor>, kMaxInstances> cursors;

  const L2Value* find_l2(std::uint16_t port, const MacAddress& mac) const {
    if (auto it = l2_filter.find(L2Key{port, mac}); it != l2_filter.end()) return &it->second;
    if (auto it = l2_filter.find(L2Key{std::nullopt, mac}); it != l2_filter.end()) return &it->second;
    return nullptr;
  }

  const L3Value* find_l3(std::uint16_t port, const IpAddress& ip) const {
    const std::uint16_t et = ethertype_of(ip.family());
    if (auto it = l3_filter.find(L3Key{port, et, ip}); it != l3_filter.end()) return &it->second;
    if (auto it = l3_filter.find(L3Key{std::nullopt, et, ip}); it != l3_filter.end()) return &it->second;
    return nullptr;
  }

  const Calendar* find_calendar(InstanceId inst, EpochId epoch) const {
    auto it = calendars.find(CalendarKey{inst, epoch});
    return it == calendars.end() ? nullptr : &it->second;
  }

  const MemberRewrite* find_member(InstanceId inst, AddressFamily f, MemberId m) const {
    auto it = members.find(MemberKey{inst, f, m});
    return it == members.end() ? nullptr : &it->second;
  }

  /// Address families an instance receives traffic on, from the L3 filter.
  std::set<AddressFamily> accepted_families(InstanceId inst) const {
    std::set<AddressFamily> out;
    for (const auto& [k, v] : l3_filter)
      if (v.instance == inst)
        out.insert(k.ethertype == kEthertypeIpv6 ? AddressFamily::V6 : AddressFamily::V4);
    return out;
  }

  /// Epochs reachable from the epoch assignment table of an instance.
  std::set<EpochId> reachable_epochs(InstanceId inst) const {
    std::set<EpochId> out;
    for (const auto& [p, e] : epoch_assignment[inst].entries()) out.insert(e);
    return out;
  }

  friend bool operator==(const PipelineTables&, const PipelineTables&) = default;
};

/// Checks totality and referential integrity; throws Error on the first
/// violation found.
inline void validate_tables(const PipelineTables& t) {
  for (InstanceId inst = 0; inst < kMaxInstances; ++inst) {
    const auto& trie = t.epoch_assignment[inst];
    if (trie.empty()) continue;
    if (!trie.find(EpochPrefix{0, 0}))
      throw Error(ErrorCode::ConfigInvalid,
                  "instance " + std::to_string(inst) + " has no wildcard epoch entry");
    const auto families = t.accepted_families(inst);
    for (EpochId e : t.reachable_epochs(inst)) {
      const Calendar* cal = t.find_calendar(inst, e);
      if (!cal || !cal->complete())
        throw Error(ErrorCode::IncompleteCalendar,
                    "instance " + std::to_string(inst) + " epoch " + std::to_string(e));
      for (const auto& [m, n] : cal->histogram())
        for (AddressFamily f : families)
          if (!t.find_member(inst, f, m))
            throw Error(ErrorCode::MissingRewrite,
                        "instance " + std::to_string(inst) + " member " + std::to_string(m));
    }
  }
  for (const auto& [k, r] : t.members)
    if (!r.port_range_valid() || r.cn_ip.family() != k.family)
      throw Error(ErrorCode::InvalidMember, "member " + std::to_string(k.member));
  for (const auto& [k, v] : t.l3_filter)
    if (v.instance >= kMaxInstances) throw Error(ErrorCode::UnknownInstance, "L3 entry");
}

}  // namespace ejfat
