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
#include <map>
#include <string>
#include <vector>

#include "ejfat/json.hpp"
#include "ejfat/pipeline.hpp"
#include "ejfat/segment.hpp"
#include "ejfat/sim/impair.hpp"

namespace ejfat::sim {

struct ScheduledMember {
  std::uint32_t cn = 0;
  double weight = 1.0;
  friend bool operator==(const ScheduledMember&, const ScheduledMember&) = default;
};

/// One entry of the epoch schedule. The first entry is installed before any
/// traffic and covers every event below the second entry's boundary.
struct ScheduledEpoch {
  std::uint64_t boundary_event = 0;
  std::vector<ScheduledMember> members;
  std::string label;
};

/// Malformed or misaddressed packets mixed into the stream on purpose. Each
/// one is expected to be discarded by the balancer for a known reason.
struct JunkConfig {
  double fraction = 0.0;  // junk packets per good packet
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::size_t daq_count = 5;
  std::size_t cn_count = 10;
  std::uint64_t first_event = 0;
  std::uint64_t event_count = 1000;
  std::size_t bundle_min = 200;
  std::size_t bundle_max = 3000;
  std::size_t mtu_payload = 1000;
  bool sequential_entropy = false;
  AddressFamily family = AddressFamily::V6;
  PipelineMode mode = PipelineMode::Frame;
  ImpairmentConfig impairment;
  JunkConfig junk;
  std::vector<ScheduledEpoch> epochs;
  std::uint16_t cn_base_port = 17750;
  std::uint8_t cn_entropy_bits = 2;
  /// Events ahead of a boundary at which its epoch is activated; 0 picks a
  /// value that is safe for the reorder window.
  std::uint64_t activation_headroom = 0;
  /// Packets after the first new-epoch packet before the old epoch is
  /// removed; 0 picks twice the reorder window plus one.
  std::uint64_t quiesce_packets = 0;
  std::uint64_t packet_time_ns = 100;
  std::uint64_t event_period_ns = 10'000;
  std::size_t workers = 1;
  bool record_traces = false;

  std::uint64_t effective_headroom() const noexcept {
    if (activation_headroom) return activation_headroom;
    return 2 * impairment.reorder_window / std::max<std::size_t>(daq_count, 1) + 64;
  }
  std::uint64_t effective_quiesce() const noexcept {
    return quiesce_packets ? quiesce_packets : 2 * impairment.reorder_window + 1;
  }
};

/// Throws Error(ConfigInvalid) describing the first problem found.
inline void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::ConfigInvalid, why); };
  if (c.daq_count == 0 || c.daq_count > 0xffff) fail("daq_count must be in [1, 65535]");
  if (c.cn_count == 0 || c.cn_count > kCalendarSlots) fail("cn_count must be in [1, 512]");
  if (c.event_count == 0) fail("event_count must be positive");
  if (c.first_event + c.event_count < c.first_event) fail("event range overflows");
  if (c.bundle_min > c.bundle_max) fail("bundle_min > bundle_max");
  if (c.mtu_payload <= SegmentHeader::kSize || kLbHeaderSize + c.mtu_payload > kMaxDatagramSize)
    fail("mtu_payload out of range");
  if (c.epochs.empty()) fail("epoch schedule is empty");
  if (c.epochs.front().boundary_event > c.first_event) fail("first epoch must start at or before first_event");
  for (std::size_t i = 1; i < c.epochs.size(); ++i)
    if (c.epochs[i].boundary_event <= c.epochs[i - 1].boundary_event)
      fail("epoch boundaries must be strictly increasing");
  for (const auto& e : c.epochs) {
    if (e.members.empty()) fail("epoch '" + e.label + "' has no members");
    for (const auto& m : e.members) {
      if (m.cn >= c.cn_count) fail("epoch '" + e.label + "' references unknown CN " + std::to_string(m.cn));
      if (!(m.weight > 0)) fail("member weights must be positive");
    }
  }
  if (c.cn_entropy_bits > 16 ||
      std::uint32_t{c.cn_base_port} + (std::uint32_t{1} << c.cn_entropy_bits) - 1 > 0xffff)
    fail("CN port range overflows");
  if (c.impairment.loss_rate < 0 || c.impairment.loss_rate > 1) fail("loss_rate must be in [0, 1]");
  if (c.junk.fraction < 0) fail("junk fraction must be non-negative");
  // An activation must land before any packet of the boundary event can
  // arrive: every event carries at least daq_count packets.
  if (c.effective_headroom() * c.daq_count <= 2 * c.impairment.reorder_window)
    fail("activation_headroom too small for the reorder window");
  if (c.effective_quiesce() < 2 * c.impairment.reorder_window) fail("quiesce_packets shorter than 2x reorder window");
  if (c.workers == 0) fail("workers must be positive");
}

inline Json scenario_to_json(const ScenarioConfig& c) {
  Json epochs = Json::array();
  for (const auto& e : c.epochs) {
    Json ms = Json::array();
    for (const auto& m : e.members) ms.push_back({{"cn", m.cn}, {"weight", m.weight}});
    epochs.push_back({{"label", e.label}, {"boundary_event", e.boundary_event}, {"members", ms}});
  }
  return Json{{"seed", c.seed},
              {"daq_count", c.daq_count},
              {"cn_count", c.cn_count},
              {"first_event", c.first_event},
              {"event_count", c.event_count},
              {"bundle_size", {{"min", c.bundle_min}, {"max", c.bundle_max}}},
              {"mtu_payload", c.mtu_payload},
              {"entropy", c.sequential_entropy ? "sequential" : "random"},
              {"address_family", c.family == AddressFamily::V4 ? "ipv4" : "ipv6"},
              {"mode", c.mode == PipelineMode::Frame ? "frame" : "socket"},
              {"impairment",
               {{"delay", std::string(to_string(c.impairment.delay))},
                {"mean_delay", c.impairment.mean_delay},
                {"reorder_window", c.impairment.reorder_window},
                {"loss_rate", c.impairment.loss_rate}}},
              {"junk_fraction", c.junk.fraction},
              {"cn_base_port", c.cn_base_port},
              {"cn_entropy_bits", c.cn_entropy_bits},
              {"activation_headroom", c.activation_headroom},
              {"quiesce_packets", c.quiesce_packets},
              {"packet_time_ns", c.packet_time_ns},
              {"event_period_ns", c.event_period_ns},
              {"workers", c.workers},
              {"record_traces", c.record_traces},
              {"epochs", epochs}};
}

inline ScenarioConfig scenario_from_json(const Json& j) {
  using detail::optional_field;
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "scenario must be an object");
  ScenarioConfig c;
  try {
    c.seed = optional_field<std::uint64_t>(j, "seed", c.seed);
    c.daq_count = optional_field<std::size_t>(j, "daq_count", c.daq_count);
    c.cn_count = optional_field<std::size_t>(j, "cn_count", c.cn_count);
    c.first_event = optional_field<std::uint64_t>(j, "first_event", c.first_event);
    c.event_count = optional_field<std::uint64_t>(j, "event_count", c.event_count);
    if (auto it = j.find("bundle_size"); it != j.end()) {
      c.bundle_min = optional_field<std::size_t>(*it, "min", c.bundle_min);
      c.bundle_max = optional_field<std::size_t>(*it, "max", c.bundle_max);
    }
    c.mtu_payload = optional_field<std::size_t>(j, "mtu_payload", c.mtu_payload);
    const auto entropy = optional_field<std::string>(j, "entropy", "random");
    if (entropy != "random" && entropy != "sequential")
      throw Error(ErrorCode::ConfigInvalid, "entropy must be 'random' or 'sequential'");
    c.sequential_entropy = entropy == "sequential";
    const auto fam = optional_field<std::string>(j, "address_family", "ipv6");
    if (fam != "ipv4" && fam != "ipv6") throw Error(ErrorCode::ConfigInvalid, "address_family must be ipv4|ipv6");
    c.family = fam == "ipv4" ? AddressFamily::V4 : AddressFamily::V6;
    const auto mode = optional_field<std::string>(j, "mode", "frame");
    if (mode != "frame" && mode != "socket") throw Error(ErrorCode::ConfigInvalid, "mode must be frame|socket");
    c.mode = mode == "frame" ? PipelineMode::Frame : PipelineMode::Socket;
    if (auto it = j.find("impairment"); it != j.end()) {
      c.impairment.delay = delay_model_from(optional_field<std::string>(*it, "delay", "uniform"));
      c.impairment.mean_delay = optional_field<double>(*it, "mean_delay", 0.0);
      c.impairment.reorder_window = optional_field<std::size_t>(*it, "reorder_window", 0);
      c.impairment.loss_rate = optional_field<double>(*it, "loss_rate", 0.0);
    }
    c.junk.fraction = optional_field<double>(j, "junk_fraction", 0.0);
    c.cn_base_port = optional_field<std::uint16_t>(j, "cn_base_port", c.cn_base_port);
    c.cn_entropy_bits = optional_field<std::uint8_t>(j, "cn_entropy_bits", c.cn_entropy_bits);
    c.activation_headroom = optional_field<std::uint64_t>(j, "activation_headroom", 0);
    c.quiesce_packets = optional_field<std::uint64_t>(j, "quiesce_packets", 0);
    c.packet_time_ns = optional_field<std::uint64_t>(j, "packet_time_ns", c.packet_time_ns);
    c.event_period_ns = optional_field<std::uint64_t>(j, "event_period_ns", c.event_period_ns);
    c.workers = optional_field<std::size_t>(j, "workers", c.workers);
    c.record_traces = optional_field<bool>(j, "record_traces", c.record_traces);
    for (const auto& e : j.value("epochs", Json::array())) {
      ScheduledEpoch ep;
      ep.label = optional_field<std::string>(e, "label", "");
      ep.boundary_event = optional_field<std::uint64_t>(e, "boundary_event", 0);
      for (const auto& m : e.value("members", Json::array()))
        ep.members.push_back({detail::require<std::uint32_t>(m, "cn"), optional_field<double>(m, "weight", 1.0)});
      c.epochs.push_back(std::move(ep));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  validate(c);
  return c;
}

/// The three-epoch run of the reference system test: one CN, then CN-4..6
/// replacing CN-0, then all ten CNs with CN-5 carrying double weight.
inline ScenarioConfig figure6_scenario(std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.seed = seed;
  c.daq_count = 5;
  c.cn_count = 10;
  c.event_count = 12800;
  c.impairment = ImpairmentConfig{DelayModel::Uniform, 0.0, 1000, 0.0};
  c.epochs.push_back({0, {{0, 1.0}}, "epoch1"});
  c.epochs.push_back({3000, {{4, 1.0}, {5, 1.0}, {6, 1.0}}, "epoch2"});
  std::vector<ScheduledMember> all;
  for (std::uint32_t cn = 0; cn < 10; ++cn) all.push_back({cn, cn == 5 ? 2.0 : 1.0});
  c.epochs.push_back({6000, all, "epoch3"});
  return c;
}

}  // namespace ejfat::sim
