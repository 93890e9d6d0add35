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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ejfat/daemon/udp.hpp"
#include "ejfat/json.hpp"

namespace ejfat::daemon {

/// A service socket and the instance whose traffic it carries. In socket
/// mode the listen address stands in for the L2/L3 filters.
struct ListenSpec {
  Endpoint endpoint{IpAddress::v4({0, 0, 0, 0}), kLbServicePort};
  InstanceId instance = 0;
  friend bool operator==(const ListenSpec&, const ListenSpec&) = default;
};

/// Live configuration that survives a restart.
struct DaemonState {
  PipelineTables tables;
  std::map<InstanceId, std::vector<MemberSpec>> registry;
};

struct DaemonConfig {
  std::vector<ListenSpec> listen{ListenSpec{}};
  Endpoint control_listen{IpAddress::v4({127, 0, 0, 1}), 19580};
  std::chrono::milliseconds counters_flush_interval{10'000};
  /// Wall time a retired epoch is kept after traffic reaches its successor.
  std::chrono::milliseconds quiesce_delay{1'000};
  bool auto_cleanup = true;
  /// Events ahead of the highest observed event used when a plan omits its
  /// boundary.
  std::uint64_t activation_headroom = 4096;
  std::size_t source_socket_cache = 1024;
  std::size_t receive_buffer_bytes = std::size_t{8} << 20;
  std::uint8_t expected_version = kDefaultLbVersion;
  std::string log_level = "info";
  /// Rewritten after every control-plane mutation and preferred over
  /// `state` at startup when it exists.
  std::optional<std::filesystem::path> state_file;
  std::vector<EpochPlan> initial_epochs;  // applied only without state
  std::optional<DaemonState> state;
};

inline ListenSpec parse_listen_spec(std::string_view text) {
  ListenSpec l;
  std::string_view addr = text;
  if (auto eq = text.rfind('='); eq != std::string_view::npos) {
    addr = text.substr(0, eq);
    const std::string inst(text.substr(eq + 1));
    if (inst.size() != 1 || inst[0] < '0' || inst[0] >= static_cast<char>('0' + kMaxInstances))
      throw Error(ErrorCode::UnknownInstance, "listen instance '" + inst + "'");
    l.instance = static_cast<InstanceId>(inst[0] - '0');
  }
  auto ep = io::parse_endpoint(addr, kLbServicePort);
  if (!ep) throw Error(ErrorCode::ConfigInvalid, "bad listen address '" + std::string(addr) + "'");
  l.endpoint = *ep;
  return l;
}

/// Comma separated `address[:port][=instance]` items.
inline std::vector<ListenSpec> parse_listen_list(std::string_view text) {
  std::vector<ListenSpec> out;
  std::stringstream ss{std::string(text)};
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(parse_listen_spec(item));
  if (out.empty()) throw Error(ErrorCode::ConfigInvalid, "empty listen list");
  return out;
}

inline Json registry_to_json(const std::map<InstanceId, std::vector<MemberSpec>>& r) {
  Json j = Json::object();
  for (const auto& [inst, ms] : r) {
    Json arr = Json::array();
    for (const auto& m : ms) arr.push_back(member_spec_to_json(m));
    j[std::to_string(inst)] = arr;
  }
  return j;
}

inline std::map<InstanceId, std::vector<MemberSpec>> registry_from_json(const Json& j) {
  std::map<InstanceId, std::vector<MemberSpec>> r;
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "registry must be an object");
  for (const auto& [key, arr] : j.items()) {
    if (key.size() != 1 || key[0] < '0' || key[0] >= static_cast<char>('0' + kMaxInstances))
      throw Error(ErrorCode::UnknownInstance, key);
    auto& ms = r[static_cast<InstanceId>(key[0] - '0')];
    for (const auto& m : arr) ms.push_back(member_spec_from_json(m));
  }
  return r;
}

inline Json state_to_json(const DaemonState& s) {
  return Json{{"tables", tables_to_json(s.tables)}, {"registry", registry_to_json(s.registry)}};
}

inline DaemonState state_from_json(const Json& j) {
  DaemonState s;
  s.tables = tables_from_json(detail::require<Json>(j, "tables"));
  s.registry = registry_from_json(j.value("registry", Json::object()));
  return s;
}

inline Json config_to_json(const DaemonConfig& c) {
  Json listen = Json::array();
  for (const auto& l : c.listen) listen.push_back({{"address", l.endpoint.to_string()}, {"instance", l.instance}});
  Json epochs = Json::array();
  for (const auto& p : c.initial_epochs) epochs.push_back(epoch_plan_to_json(p));
  Json j{{"listen", listen},
         {"control_listen", c.control_listen.to_string()},
         {"counters_flush_interval_ms", c.counters_flush_interval.count()},
         {"quiesce_delay_ms", c.quiesce_delay.count()},
         {"auto_cleanup", c.auto_cleanup},
         {"activation_headroom", c.activation_headroom},
         {"source_socket_cache", c.source_socket_cache},
         {"receive_buffer_bytes", c.receive_buffer_bytes},
         {"expected_version", c.expected_version},
         {"log_level", c.log_level},
         {"epochs", epochs}};
  if (c.state_file) j["state_file"] = c.state_file->string();
  if (c.state) j["state"] = state_to_json(*c.state);
  return j;
}

inline DaemonConfig config_from_json(const Json& j) {
  using detail::optional_field;
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be an object");
  DaemonConfig c;
  if (auto it = j.find("listen"); it != j.end()) {
    c.listen.clear();
    for (const auto& l : *it) {
      const auto addr = detail::require<std::string>(l, "address");
      auto ep = io::parse_endpoint(addr, kLbServicePort);
      if (!ep) throw Error(ErrorCode::ConfigInvalid, "bad listen address '" + addr + "'");
      c.listen.push_back(ListenSpec{*ep, detail::instance_from(l)});
    }
  }
  if (auto v = optional_field<std::string>(j, "control_listen", ""); !v.empty()) {
    auto ep = io::parse_endpoint(v, std::nullopt);
    if (!ep) throw Error(ErrorCode::ConfigInvalid, "bad control_listen '" + v + "'");
    c.control_listen = *ep;
  }
  c.counters_flush_interval = std::chrono::milliseconds(
      optional_field<std::int64_t>(j, "counters_flush_interval_ms", c.counters_flush_interval.count()));
  c.quiesce_delay = std::chrono::milliseconds(optional_field<std::int64_t>(j, "quiesce_delay_ms", c.quiesce_delay.count()));
  c.auto_cleanup = optional_field<bool>(j, "auto_cleanup", c.auto_cleanup);
  c.activation_headroom = optional_field<std::uint64_t>(j, "activation_headroom", c.activation_headroom);
  c.source_socket_cache = optional_field<std::size_t>(j, "source_socket_cache", c.source_socket_cache);
  c.receive_buffer_bytes = optional_field<std::size_t>(j, "receive_buffer_bytes", c.receive_buffer_bytes);
  c.expected_version = optional_field<std::uint8_t>(j, "expected_version", c.expected_version);
  c.log_level = optional_field<std::string>(j, "log_level", c.log_level);
  if (auto v = optional_field<std::string>(j, "state_file", ""); !v.empty()) c.state_file = v;
  for (const auto& p : j.value("epochs", Json::array())) c.initial_epochs.push_back(epoch_plan_from_json(p));
  if (auto it = j.find("state"); it != j.end() && !it->is_null()) c.state = state_from_json(*it);
  return c;
}

inline DaemonConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open " + path.string());
  try {
    return config_from_json(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
}

/// Writes via a temporary file and rename so a crash never leaves a torn
/// document behind.
inline void write_json_atomically(const std::filesystem::path& path, const Json& j) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ejfat::daemon
