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

// A daemon plus socket-backed CN sinks on loopback, driven over the real
// control API.

#include <httplib.h>

#include <chrono>
#include <memory>
#include <random>
#include <thread>

#include "ejfat/daemon/server.hpp"
#include "ejfat/emu/daq.hpp"
#include "ejfat/emu/sink.hpp"

namespace ejfat::testing {

inline const IpAddress kLoopLb = *IpAddress::parse("127.0.0.2");
inline const IpAddress kLoopDaq = *IpAddress::parse("127.0.0.1");

inline IpAddress sink_address(std::size_t i) {
  return IpAddress::v4({127, 0, 1, static_cast<std::uint8_t>(i + 1)});
}

inline daemon::DaemonConfig loopback_config() {
  daemon::DaemonConfig c;
  c.listen = {daemon::ListenSpec{Endpoint{kLoopLb, 0}, 0}};
  c.control_listen = Endpoint{kLoopDaq, 0};
  c.counters_flush_interval = std::chrono::milliseconds(0);
  c.auto_cleanup = false;
  c.log_level = "warn";
  return c;
}

inline MemberSpec sink_member(MemberId id, const emu::CnSink& s, double weight = 1.0) {
  MemberSpec m;
  m.member = id;
  m.cn_ipv4 = s.address();
  m.udp_base_port = s.base_port();
  m.entropy_bits = s.entropy_bits();
  m.weight = weight;
  return m;
}

struct ApiResult {
  int status = 0;
  Json body;
};

class ApiClient {
 public:
  explicit ApiClient(const Endpoint& ep) : client_(ep.addr.to_string(), ep.port) {
    client_.set_read_timeout(10, 0);
  }

  ApiResult call(const std::string& method, const std::string& path, const Json& body = Json::object()) {
    httplib::Result r = method == "GET"    ? client_.Get(path)
                        : method == "PUT"  ? client_.Put(path, body.dump(), "application/json")
                                           : client_.Post(path, body.dump(), "application/json");
    if (!r) return {0, Json()};
    return {r->status, Json::parse(r->body, nullptr, false)};
  }

 private:
  httplib::Client client_;
};

inline std::vector<std::uint8_t> random_bundle(std::mt19937_64& rng, std::size_t size) {
  std::vector<std::uint8_t> b(size);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

/// Polls `done` until it holds or `timeout` passes.
template <typename F>
bool wait_for(F done, std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
  const auto until = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < until) {
    if (done()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return done();
}

struct LiveRig {
  std::vector<std::unique_ptr<emu::CnSink>> sinks;
  std::unique_ptr<daemon::Daemon> lb;

  LiveRig(std::size_t sink_count, daemon::DaemonConfig cfg = loopback_config(), std::uint8_t bits = 2) {
    for (std::size_t i = 0; i < sink_count; ++i) {
      sinks.push_back(emu::CnSink::bind_any(sink_address(i), bits));
      sinks.back()->start();
    }
    lb = std::make_unique<daemon::Daemon>(std::move(cfg));
    lb->start();
  }

  ApiClient api() const { return ApiClient(lb->control_endpoint()); }
  Endpoint service() const { return lb->listen_endpoints().front(); }

  emu::DaqSender daq(std::uint16_t id) const {
    emu::DaqConfig c;
    c.local = Endpoint{kLoopDaq, 0};
    c.balancer = service();
    c.data_source_id = id;
    return emu::DaqSender(c);
  }

  std::size_t completed() const {
    std::size_t n = 0;
    for (const auto& s : sinks) n += s->completed();
    return n;
  }
};

}  // namespace ejfat::testing
