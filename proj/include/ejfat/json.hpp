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

// JSON forms of the control-plane types. Used for scenario files, the daemon
// config/state document and the control API bodies.

#include <json.hpp>

#include <string>

#include "ejfat/control_plane.hpp"
#include "ejfat/error.hpp"
#include "ejfat/tables.hpp"

namespace ejfat {

using Json = nlohmann::json;

namespace detail {

template <typename T>
T require(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::ConfigInvalid, std::string("missing field '") + key + "'");
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T optional_field(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("field '") + key + "': " + e.what());
  }
}

inline IpAddress parse_ip(const std::string& s) {
  auto ip = IpAddress::parse(s);
  if (!ip) throw Error(ErrorCode::ConfigInvalid, "bad IP address '" + s + "'");
  return *ip;
}

inline MacAddress parse_mac(const std::string& s) {
  auto mac = MacAddress::parse(s);
  if (!mac) throw Error(ErrorCode::ConfigInvalid, "bad MAC address '" + s + "'");
  return *mac;
}

inline Json port_match_json(const PortMatch& p) { return p ? Json(*p) : Json(nullptr); }

inline PortMatch port_match_from(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::uint16_t>();
}

inline InstanceId instance_from(const Json& j) {
  const auto v = optional_field<unsigned>(j, "instance", 0);
  if (v >= kMaxInstances) throw Error(ErrorCode::UnknownInstance, std::to_string(v));
  return static_cast<InstanceId>(v);
}

}  // namespace detail

inline Json calendar_to_json(const Calendar& c) {
  Json slots = Json::array();
  for (MemberId m : c.slots) slots.push_back(m == kNoMember ? Json(nullptr) : Json(m));
  return slots;
}

/// Accepts exactly 512 entries; null marks an empty slot.
inline Calendar calendar_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigInvalid, "calendar must be an array");
  if (j.size() != kCalendarSlots)
    throw Error(ErrorCode::IncompleteCalendar,
                "calendar has " + std::to_string(j.size()) + " slots, need 512");
  Calendar c;
  for (std::size_t i = 0; i < kCalendarSlots; ++i)
    c.slots[i] = j[i].is_null() ? kNoMember : j[i].get<MemberId>();
  return c;
}

inline Json member_spec_to_json(const MemberSpec& m) {
  Json j{{"member", m.member},
         {"next_hop_mac", m.next_hop_mac.to_string()},
         {"udp_base_port", m.udp_base_port},
         {"entropy_bits", m.entropy_bits},
         {"weight", m.weight}};
  if (m.cn_ipv4) j["cn_ipv4"] = m.cn_ipv4->to_string();
  if (m.cn_ipv6) j["cn_ipv6"] = m.cn_ipv6->to_string();
  return j;
}

inline MemberSpec member_spec_from_json(const Json& j) {
  MemberSpec m;
  m.member = detail::require<MemberId>(j, "member");
  if (auto v = detail::optional_field<std::string>(j, "cn_ipv4", ""); !v.empty()) m.cn_ipv4 = detail::parse_ip(v);
  if (auto v = detail::optional_field<std::string>(j, "cn_ipv6", ""); !v.empty()) m.cn_ipv6 = detail::parse_ip(v);
  m.next_hop_mac = detail::parse_mac(detail::optional_field<std::string>(j, "next_hop_mac", "00:00:00:00:00:00"));
  m.udp_base_port = detail::require<std::uint16_t>(j, "udp_base_port");
  const auto bits = detail::optional_field<unsigned>(j, "entropy_bits", 0);
  if (bits > 16) throw Error(ErrorCode::InvalidMember, "entropy_bits > 16");
  m.entropy_bits = static_cast<std::uint8_t>(bits);
  m.weight = detail::optional_field<double>(j, "weight", 1.0);
  return m;
}

inline Json epoch_plan_to_json(const EpochPlan& p) {
  Json members = Json::array();
  for (const auto& m : p.members) members.push_back(member_spec_to_json(m));
  Json j{{"instance", p.instance}, {"epoch", p.epoch}, {"boundary_event", p.boundary_event}, {"members", members}};
  if (p.calendar) j["calendar"] = calendar_to_json(*p.calendar);
  return j;
}

/// `epoch` may be omitted when the caller allocates it.
inline EpochPlan epoch_plan_from_json(const Json& j, std::optional<EpochId> default_epoch = std::nullopt) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "plan must be an object");
  EpochPlan p;
  p.instance = detail::instance_from(j);
  if (j.contains("epoch"))
    p.epoch = detail::require<EpochId>(j, "epoch");
  else if (default_epoch)
    p.epoch = *default_epoch;
  else
    throw Error(ErrorCode::ConfigInvalid, "missing field 'epoch'");
  p.boundary_event = detail::optional_field<std::uint64_t>(j, "boundary_event", 0);
  if (auto it = j.find("members"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::ConfigInvalid, "members must be an array");
    for (const auto& m : *it) p.members.push_back(member_spec_from_json(m));
  }
  if (auto it = j.find("calendar"); it != j.end() && !it->is_null()) p.calendar = calendar_from_json(*it);
  return p;
}

inline Json tables_to_json(const PipelineTables& t) {
  Json l2 = Json::array(), l3 = Json::array(), epochs = Json::array(), cals = Json::array(),
       members = Json::array(), cursors = Json::array();
  for (const auto& [k, v] : t.l2_filter)
    l2.push_back({{"input_port", detail::port_match_json(k.input_port)},
                  {"dst_mac", k.dst_mac.to_string()},
                  {"lb_src_mac", v.lb_src_mac.to_string()}});
  for (const auto& [k, v] : t.l3_filter)
    l3.push_back({{"input_port", detail::port_match_json(k.input_port)},
                  {"ethertype", k.ethertype},
                  {"dst_ip", k.dst_ip.to_string()},
                  {"lb_src_ip", v.lb_src_ip.to_string()},
                  {"instance", v.instance}});
  for (InstanceId inst = 0; inst < kMaxInstances; ++inst)
    for (const auto& [p, e] : t.epoch_assignment[inst].entries())
      epochs.push_back({{"instance", inst}, {"prefix", p.value}, {"length", p.length}, {"epoch", e}});
  for (const auto& [k, c] : t.calendars)
    cals.push_back({{"instance", k.instance}, {"epoch", k.epoch}, {"slots", calendar_to_json(c)}});
  for (const auto& [k, r] : t.members)
    members.push_back({{"instance", k.instance},
                       {"member", k.member},
                       {"next_hop_mac", r.next_hop_mac.to_string()},
                       {"cn_ip", r.cn_ip.to_string()},
                       {"udp_base_port", r.udp_base_port},
                       {"entropy_bits", r.entropy_bits}});
  for (InstanceId inst = 0; inst < kMaxInstances; ++inst)
    if (const auto& c = t.cursors[inst])
      cursors.push_back({{"instance", inst},
                         {"current", c->current},
                         {"current_start", c->current_start},
                         {"next_free", c->next_free}});
  return Json{{"service_port", t.service_port},
              {"expected_version", t.expected_version},
              {"l2_filter", l2},
              {"l3_filter", l3},
              {"epoch_assignment", epochs},
              {"calendars", cals},
              {"members", members},
              {"cursors", cursors}};
}

inline PipelineTables tables_from_json(const Json& j) {
  using detail::require;
  PipelineTables t;
  t.service_port = detail::optional_field<std::uint16_t>(j, "service_port", kLbServicePort);
  t.expected_version = detail::optional_field<std::uint8_t>(j, "expected_version", kDefaultLbVersion);
  for (const auto& e : j.value("l2_filter", Json::array()))
    t.l2_filter[L2Key{detail::port_match_from(e, "input_port"), detail::parse_mac(require<std::string>(e, "dst_mac"))}] =
        L2Value{detail::parse_mac(require<std::string>(e, "lb_src_mac"))};
  for (const auto& e : j.value("l3_filter", Json::array())) {
    const IpAddress dst = detail::parse_ip(require<std::string>(e, "dst_ip"));
    const auto et = detail::optional_field<std::uint16_t>(e, "ethertype", ethertype_of(dst.family()));
    t.l3_filter[L3Key{detail::port_match_from(e, "input_port"), et, dst}] =
        L3Value{detail::parse_ip(require<std::string>(e, "lb_src_ip")), detail::instance_from(e)};
  }
  for (const auto& e : j.value("epoch_assignment", Json::array())) {
    EpochPrefix p{require<std::uint64_t>(e, "prefix"), require<unsigned>(e, "length")};
    if (!p.well_formed()) throw Error(ErrorCode::ConfigInvalid, "malformed epoch prefix");
    t.epoch_assignment[detail::instance_from(e)].insert(p, require<EpochId>(e, "epoch"));
  }
  for (const auto& e : j.value("calendars", Json::array()))
    t.calendars[CalendarKey{detail::instance_from(e), require<EpochId>(e, "epoch")}] =
        calendar_from_json(e.at("slots"));
  for (const auto& e : j.value("members", Json::array())) {
    MemberRewrite r;
    r.next_hop_mac = detail::parse_mac(detail::optional_field<std::string>(e, "next_hop_mac", "00:00:00:00:00:00"));
    r.cn_ip = detail::parse_ip(require<std::string>(e, "cn_ip"));
    r.udp_base_port = require<std::uint16_t>(e, "udp_base_port");
    r.entropy_bits = require<std::uint8_t>(e, "entropy_bits");
    t.members[MemberKey{detail::instance_from(e), r.cn_ip.family(), require<MemberId>(e, "member")}] = r;
  }
  for (const auto& e : j.value("cursors", Json::array()))
    t.cursors[detail::instance_from(e)] =
        EpochCursor{require<EpochId>(e, "current"), require<std::uint64_t>(e, "current_start"),
                    require<EpochId>(e, "next_free")};
  validate_tables(t);
  return t;
}

}  // namespace ejfat
