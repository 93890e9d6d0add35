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

#include <string>
#include <vector>

#include "ejfat/control_plane.hpp"
#include "ejfat/pipeline.hpp"
#include "ejfat/segment.hpp"

namespace ejfat::testing {

inline IpAddress ip(const std::string& s) { return *IpAddress::parse(s); }

inline const IpAddress kLbV4 = ip("192.0.2.1");
inline const IpAddress kLbV6 = ip("2001:db8::1");
inline const MacAddress kLbMac({0x02, 0, 0, 0, 0, 0x01});

inline MemberSpec member(MemberId id, double weight = 1.0, std::uint8_t bits = 2) {
  MemberSpec m;
  m.member = id;
  m.cn_ipv4 = ip("10.0.0." + std::to_string(10 + id));
  m.cn_ipv6 = ip("fd00::" + std::to_string(10 + id));
  m.next_hop_mac = MacAddress({0x02, 0, 0, 0, 1, static_cast<std::uint8_t>(id)});
  m.udp_base_port = static_cast<std::uint16_t>(17000 + 100 * id);
  m.entropy_bits = bits;
  m.weight = weight;
  return m;
}

/// Tables with both LB addresses on instance 0 and the members installed as
/// epoch 0.
inline PipelineTables single_epoch(const std::vector<MemberSpec>& members, InstanceId inst = 0) {
  PipelineTables t;
  add_lb_address(t, inst, kLbV4, kLbMac);
  add_lb_address(t, inst, kLbV6, kLbMac);
  return activate_epoch(EpochPlan{inst, 0, 0, members, std::nullopt}, t);
}

inline DaqPacket daq_packet(std::uint64_t event, std::uint16_t entropy = 0, bool v6 = false,
                            std::vector<std::uint8_t> payload = {1, 2, 3}) {
  const Endpoint src{v6 ? ip("2001:db8:1::5") : ip("198.51.100.5"), 40001};
  const Endpoint dst{v6 ? kLbV6 : kLbV4, kLbServicePort};
  auto p = DaqPacket::make(src, dst, LbHeader{1, 1, 0, entropy, event}, payload);
  p.link = LinkInfo{3, MacAddress({0x02, 9, 9, 9, 9, 9}), kLbMac};
  return p;
}

}  // namespace ejfat::testing
