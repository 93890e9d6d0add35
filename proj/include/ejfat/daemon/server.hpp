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

#include <spdlog/spdlog.h>

#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <list>
#include <mutex>
#include <thread>

#include "ejfat/control_plane.hpp"
#include "ejfat/daemon/config.hpp"
#include "ejfat/daemon/udp.hpp"
#include "ejfat/json.hpp"
#include "ejfat/pipeline.hpp"
#include "ejfat/snapshot.hpp"

namespace ejfat::daemon {

/// Sending sockets keyed by local (address, port), so forwarded datagrams
/// keep the DAQ's source port. Least recently used sockets are closed past
/// `capacity`; a port that cannot be bound goes out through a shared
/// ephemeral socket instead.
class SenderCache {
 public:
  explicit SenderCache(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  const io::UdpSocket& for_source(const Endpoint& src) {
    if (auto it = entries_.find(src); it != entries_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.pos);
      return it->second.socket ? it->second.socket : fallback(src.addr);
    }
    io::UdpSocket s;
    try {
      s = io::UdpSocket::bind(src, 0, true);
    } catch (const Error&) {
      ++bind_failures_;
    }
    lru_.push_front(src);
    auto& e = entries_[src];
    e.socket = std::move(s);
    e.pos = lru_.begin();
    if (entries_.size() > capacity_) {
      entries_.erase(lru_.back());
      lru_.pop_back();
    }
    return e.socket ? e.socket : fallback(src.addr);
  }

  std::size_t size() const noexcept { return entries_.size(); }
  std::uint64_t bind_failures() const noexcept { return bind_failures_; }

 private:
  const io::UdpSocket& fallback(const IpAddress& local) {
    auto& s = fallback_[local];
    if (!s) {
      try {
        s = io::UdpSocket::bind(Endpoint{local, 0});
      } catch (const Error&) {
        s = io::UdpSocket::bind(Endpoint{local.is_v4() ? IpAddress::v4({}) : IpAddress::v6({}), 0});
      }
    }
    return s;
  }

  struct Entry {
    io::UdpSocket socket;
    std::list<Endpoint>::iterator pos;
  };
  std::size_t capacity_;
  std::map<Endpoint, Entry> entries_;
  std::list<Endpoint> lru_;
  std::map<IpAddress, io::UdpSocket> fallback_;
  std::uint64_t bind_failures_ = 0;
};

struct ApiResponse {
  int status = 200;
  Json body;
};

/// Per-instance observations made by the packet workers.
struct InstanceStats {
  std::atomic<bool> seen{false};
  std::atomic<std::uint64_t> max_event{0};
  std::array<std::atomic<std::uint64_t>, kCalendarSlots> slot_hits{};

  void observe(std::uint64_t event) noexcept {
    slot_hits[slot_of(event)].fetch_add(1, std::memory_order_relaxed);
    std::uint64_t cur = max_event.load(std::memory_order_relaxed);
    if (!seen.load(std::memory_order_relaxed)) {
      // First sighting races with other workers; the CAS loop below fixes
      // up any lower value stored here.
      max_event.compare_exchange_strong(cur, event, std::memory_order_relaxed);
      seen.store(true, std::memory_order_release);
      cur = max_event.load(std::memory_order_relaxed);
    }
    while (event > cur && !max_event.compare_exchange_weak(cur, event, std::memory_order_relaxed)) {
    }
  }

  std::optional<std::uint64_t> max() const noexcept {
    if (!seen.load(std::memory_order_acquire)) return std::nullopt;
    return max_event.load(std::memory_order_relaxed);
  }
};

/// Chi-square statistic of per-slot hit counts against a uniform spread.
/// Large values flag event numbers that are not spread over the calendar.
inline double slot_chi_square(const std::array<std::atomic<std::uint64_t>, kCalendarSlots>& hits) {
  std::uint64_t total = 0;
  for (const auto& h : hits) total += h.load(std::memory_order_relaxed);
  if (!total) return 0.0;
  const double expect = static_cast<double>(total) / kCalendarSlots;
  double chi = 0.0;
  for (const auto& h : hits) {
    const double d = static_cast<double>(h.load(std::memory_order_relaxed)) - expect;
    chi += d * d / expect;
  }
  return chi;
}

/// The load balancer service: one receive worker per listen socket, a
/// control API over HTTP and a housekeeping thread for counter logging and
/// retired-epoch cleanup. Packet workers read table snapshots and never
/// wait on the control plane.
class Daemon {
 public:
  explicit Daemon(DaemonConfig cfg) : cfg_(std::move(cfg)), cp_(holder_) {
    spdlog::set_level(spdlog::level::from_str(cfg_.log_level));
    if (cfg_.listen.empty()) throw Error(ErrorCode::ConfigInvalid, "no listen addresses");
    const std::uint16_t requested = cfg_.listen.front().endpoint.port;
    std::uint16_t port = requested;
    for (auto& l : cfg_.listen) {
      if (l.endpoint.port != requested)
        throw Error(ErrorCode::ConfigInvalid, "all listen addresses must share one port");
      if (l.instance >= kMaxInstances) throw Error(ErrorCode::UnknownInstance, std::to_string(l.instance));
      l.endpoint.port = port;
      auto sock = io::UdpSocket::bind(l.endpoint, cfg_.receive_buffer_bytes);
      if (port == 0) port = sock.local().port;
      l.endpoint.port = port;
      workers_.push_back(std::make_unique<Worker>(Worker{l, std::move(sock), {}}));
    }
    restore_state();
  }

  Daemon(const Daemon&) = delete;
  Daemon& operator=(const Daemon&) = delete;
  ~Daemon() { stop(); }

  void start() {
    if (running_.exchange(true)) return;
    stopping_ = false;
    for (auto& w : workers_) w->thread = std::thread([this, w = w.get()] { worker_loop(*w); });
    setup_http();
    const auto host = cfg_.control_listen.addr.to_string();
    if (cfg_.control_listen.port == 0) {
      const int port = http_.bind_to_any_port(host);
      if (port <= 0) throw Error(ErrorCode::BindFailure, "control API " + cfg_.control_listen.to_string());
      cfg_.control_listen.port = static_cast<std::uint16_t>(port);
    } else if (!http_.bind_to_port(host, cfg_.control_listen.port)) {
      throw Error(ErrorCode::BindFailure, "control API " + cfg_.control_listen.to_string());
    }
    http_thread_ = std::thread([this] { http_.listen_after_bind(); });
    http_.wait_until_ready();
    housekeeping_ = std::thread([this] { housekeeping_loop(); });
    for (const auto& l : cfg_.listen)
      spdlog::info("listening on {} for instance {}", l.endpoint.to_string(), unsigned{l.instance});
    spdlog::info("control API on {}", control_endpoint().to_string());
  }

  void stop() {
    if (!running_.exchange(false)) return;
    {
      std::lock_guard lk(wake_mu_);
      stopping_ = true;
    }
    wake_.notify_all();
    http_.stop();
    if (http_thread_.joinable()) http_thread_.join();
    if (housekeeping_.joinable()) housekeeping_.join();
    for (auto& w : workers_)
      if (w->thread.joinable()) w->thread.join();
  }

  std::vector<Endpoint> listen_endpoints() const {
    std::vector<Endpoint> out;
    for (const auto& l : cfg_.listen) out.push_back(l.endpoint);
    return out;
  }

  /// Valid after start(); an ephemeral control port is resolved there.
  Endpoint control_endpoint() const { return cfg_.control_listen; }

  CounterValues counters() const { return counters_.read(); }
  std::shared_ptr<const PipelineTables> snapshot() const { return holder_.get(); }
  std::optional<std::uint64_t> max_observed_event(InstanceId inst) const { return stats_.at(inst).max(); }

  /// The full configuration including the live state, as persisted.
  DaemonConfig current_config() const {
    std::lock_guard lk(control_mu_);
    return config_with_state();
  }

  /// Control API entry point, independent of the HTTP transport. Query
  /// parameters are passed as members of `body`.
  ApiResponse handle(const std::string& method, const std::string& path, const Json& body) {
    try {
      return route(method, path, body);
    } catch (const Error& e) {
      const bool unknown = e.code() == ErrorCode::UnknownEpoch || e.code() == ErrorCode::UnknownMember ||
                           e.code() == ErrorCode::UnknownInstance;
      return {unknown ? 404 : 400, Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}};
    } catch (const nlohmann::json::exception& e) {
      return {400, Json{{"error", std::string(to_string(ErrorCode::ConfigInvalid))}, {"message", e.what()}}};
    }
  }

 private:
  struct Worker {
    ListenSpec spec;
    io::UdpSocket socket;
    std::thread thread;
  };

  void restore_state() {
    std::optional<DaemonState> state = cfg_.state;
    if (cfg_.state_file && std::filesystem::exists(*cfg_.state_file)) {
      const auto persisted = load_config(*cfg_.state_file);
      if (persisted.state) state = persisted.state;
    }
    PipelineTables t;
    std::map<InstanceId, std::vector<MemberSpec>> registry;
    if (state) {
      t = state->tables;
      registry = state->registry;
    }
    t.service_port = cfg_.listen.front().endpoint.port;
    t.expected_version = cfg_.expected_version;
    for (const auto& l : cfg_.listen) add_lb_address(t, l.instance, l.endpoint.addr);
    cp_.reset(std::move(t), std::move(registry));
    if (!state)
      for (const auto& plan : cfg_.initial_epochs) cp_.activate(plan);
  }

  DaemonConfig config_with_state() const {
    DaemonConfig c = cfg_;
    c.state = DaemonState{cp_.tables(), cp_.registry()};
    c.initial_epochs.clear();
    return c;
  }

  void persist() {
    if (cfg_.state_file) write_json_atomically(*cfg_.state_file, config_to_json(config_with_state()));
  }

  void worker_loop(Worker& w) {
    auto reader = holder_.reader();
    SenderCache senders(cfg_.source_socket_cache);
    std::vector<std::uint8_t> buf(65536);
    while (!stopping_.load(std::memory_order_relaxed)) {
      auto d = w.socket.receive(buf, std::chrono::milliseconds(50));
      for (int burst = 0; d && burst < 1024; ++burst) {
        const PacketView view{nullptr, d->src, w.spec.endpoint, std::span<const std::uint8_t>(buf.data(), d->size)};
        const auto r = process_and_count(view, reader.current(), counters_, PipelineMode::Socket);
        if (const auto* f = std::get_if<Forwarded>(&r)) {
          stats_[f->instance].observe(f->header.event_number);
          if (!senders.for_source(f->packet.src).send_to(f->packet.payload, f->packet.dst))
            send_errors_.fetch_add(1, std::memory_order_relaxed);
        }
        d = w.socket.receive_now(buf);
      }
    }
  }

  void housekeeping_loop() {
    auto next_flush = std::chrono::steady_clock::now() + cfg_.counters_flush_interval;
    std::array<std::optional<std::pair<std::uint64_t, MonoTime>>, kMaxInstances> reached{};
    std::unique_lock lk(wake_mu_);
    while (!stopping_) {
      wake_.wait_for(lk, std::chrono::milliseconds(20));
      if (stopping_) break;
      const auto now = std::chrono::steady_clock::now();
      if (cfg_.counters_flush_interval.count() > 0 && now >= next_flush) {
        next_flush = now + cfg_.counters_flush_interval;
        const auto c = counters_.read();
        spdlog::info("packets in={} out={} discarded={} send_errors={}", c.packets_in, c.packets_out,
                     c.total_discards(), send_errors_.load());
      }
      if (!cfg_.auto_cleanup) continue;
      std::lock_guard cl(control_mu_);
      for (InstanceId inst = 0; inst < kMaxInstances; ++inst) {
        const auto cur = cp_.cursor(inst);
        const auto seen = stats_[inst].max();
        if (!cur || cp_.retired_epochs(inst).empty() || !seen || *seen < cur->current_start) {
          reached[inst].reset();
          continue;
        }
        if (!reached[inst] || reached[inst]->first != cur->current_start) {
          reached[inst] = std::make_pair(cur->current_start, now);
          continue;
        }
        if (now - reached[inst]->second < cfg_.quiesce_delay) continue;
        for (EpochId e : cp_.retired_epochs(inst)) {
          try {
            cp_.cleanup(inst, e);
            spdlog::info("instance {}: retired epoch {} removed", unsigned{inst}, e);
          } catch (const Error& err) {
            spdlog::warn("instance {}: cleanup of epoch {} failed: {}", unsigned{inst}, e, err.what());
          }
        }
        reached[inst].reset();
        persist_quietly();
      }
    }
  }

  void persist_quietly() {
    try {
      persist();
    } catch (const std::exception& e) {
      spdlog::error("persisting state failed: {}", e.what());
    }
  }

  Json summary() const {
    Json out = Json::array();
    for (InstanceId inst = 0; inst < kMaxInstances; ++inst) {
      const auto c = cp_.cursor(inst);
      if (!c) continue;
      Json members = Json::array();
      const Calendar* cal = cp_.tables().find_calendar(inst, c->current);
      const auto hist = cal ? cal->histogram() : std::map<MemberId, std::size_t>{};
      for (const auto& m : cp_.members(inst)) {
        auto it = hist.find(m.member);
        members.push_back({{"member", m.member}, {"weight", m.weight}, {"slots", it == hist.end() ? 0 : it->second}});
      }
      out.push_back({{"instance", inst},
                     {"current_epoch", c->current},
                     {"current_start", c->current_start},
                     {"next_free", c->next_free},
                     {"retired_epochs", cp_.retired_epochs(inst)},
                     {"members", members}});
    }
    return out;
  }

  std::uint64_t default_boundary(InstanceId inst) const {
    const auto seen = stats_[inst].max();
    std::uint64_t b = (seen ? *seen : 0) + cfg_.activation_headroom;
    if (const auto c = cp_.cursor(inst)) b = std::max(b, c->current_start + 1);
    return b;
  }

  /// Completes a plan document with an allocated epoch and a default
  /// boundary when they are absent.
  EpochPlan plan_from_request(Json j) const {
    if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "plan must be an object");
    const InstanceId inst = detail::instance_from(j);
    if (!j.contains("epoch")) j["epoch"] = cp_.allocate_epoch(inst);
    // The first epoch of an instance covers every event; its boundary is moot.
    if (!j.contains("boundary_event") || j["boundary_event"].is_null())
      j["boundary_event"] = cp_.cursor(inst) ? default_boundary(inst) : 0;
    return epoch_plan_from_json(j);
  }

  ApiResponse mutated(Json extra = Json::object()) {
    persist_quietly();
    extra["instances"] = summary();
    return {200, extra};
  }

  ApiResponse route(const std::string& method, const std::string& path, const Json& body) {
    if (method == "GET" && path == "/v1/health") return {200, Json{{"status", "ok"}}};
    if (method == "GET" && path == "/v1/counters") return {200, counters_json()};

    std::lock_guard lk(control_mu_);
    if (method == "GET" && path == "/v1/tables")
      return {200, Json{{"tables", tables_to_json(cp_.tables())}, {"instances", summary()}}};
    if (method == "GET" && path == "/v1/config") return {200, config_to_json(config_with_state())};
    if (method == "GET" && path == "/v1/members") {
      const InstanceId inst = detail::instance_from(body);
      Json ms = Json::array();
      for (const auto& m : cp_.members(inst)) ms.push_back(member_spec_to_json(m));
      return {200, Json{{"instance", inst}, {"members", ms}}};
    }
    if (method == "PUT" && path == "/v1/members") {
      Json plan = body;
      if (!plan.contains("members")) throw Error(ErrorCode::ConfigInvalid, "missing field 'members'");
      plan.erase("epoch");
      plan.erase("calendar");
      const auto p = plan_from_request(plan);
      cp_.activate(p);
      spdlog::info("instance {}: epoch {} from event {}", unsigned{p.instance}, p.epoch, p.boundary_event);
      return mutated({{"epoch", p.epoch}, {"boundary_event", p.boundary_event}});
    }
    if (method == "POST" && path == "/v1/epochs") {
      const auto p = plan_from_request(body);
      cp_.activate(p);
      spdlog::info("instance {}: epoch {} from event {}", unsigned{p.instance}, p.epoch, p.boundary_event);
      return mutated({{"epoch", p.epoch}, {"boundary_event", p.boundary_event}});
    }
    if (method == "POST" && path == "/v1/cleanup") {
      const InstanceId inst = detail::instance_from(body);
      std::vector<EpochId> epochs;
      if (body.contains("epoch"))
        epochs.push_back(detail::require<EpochId>(body, "epoch"));
      else
        epochs = cp_.retired_epochs(inst);
      for (EpochId e : epochs) cp_.cleanup(inst, e);
      return mutated({{"removed", epochs}});
    }
    if (method == "POST" && path == "/v1/feedback") {
      const InstanceId inst = detail::instance_from(body);
      cp_.submit_feedback(inst, FeedbackReport{detail::require<MemberId>(body, "member"),
                                               detail::require<double>(body, "fill_level"), MonoTime::clock::now()});
      return {200, Json{{"accepted", true}}};
    }
    if (method == "POST" && path == "/v1/rebalance") {
      const InstanceId inst = detail::instance_from(body);
      FeedbackParams params;
      params.epsilon = detail::optional_field<double>(body, "epsilon", params.epsilon);
      params.alpha = detail::optional_field<double>(body, "alpha", params.alpha);
      const std::uint64_t boundary = body.contains("boundary_event") ? detail::require<std::uint64_t>(body, "boundary_event")
                                                                     : default_boundary(inst);
      const auto p = cp_.plan_from_feedback(inst, boundary, params, MonoTime::clock::now());
      cp_.activate(p);
      return mutated({{"epoch", p.epoch}, {"boundary_event", p.boundary_event}});
    }
    return {404, Json{{"error", "NotFound"}, {"message", method + " " + path}}};
  }

  Json counters_json() const {
    const auto c = counters_.read();
    Json discards = Json::object();
    for (auto r : kAllDiscardReasons) discards[std::string(to_string(r))] = c.discarded(r);
    Json instances = Json::array();
    for (InstanceId inst = 0; inst < kMaxInstances; ++inst) {
      const auto m = stats_[inst].max();
      if (!m) continue;
      instances.push_back({{"instance", inst}, {"max_event", *m}, {"slot_chi_square", slot_chi_square(stats_[inst].slot_hits)}});
    }
    return Json{{"packets_in", c.packets_in},
                {"packets_out", c.packets_out},
                {"discards", discards},
                {"send_errors", send_errors_.load(std::memory_order_relaxed)},
                {"instances", instances}};
  }

  void setup_http() {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      Json body = Json::object();
      if (!req.body.empty()) {
        body = Json::parse(req.body, nullptr, false);
        if (body.is_discarded()) {
          res.status = 400;
          res.set_content(Json{{"error", "ConfigInvalid"}, {"message", "body is not JSON"}}.dump(), "application/json");
          return;
        }
      }
      if (body.is_object())
        for (const auto& [k, v] : req.params) {
          const Json parsed = Json::parse(v, nullptr, false);
          body[k] = parsed.is_discarded() ? Json(v) : parsed;
        }
      const auto r = handle(req.method, req.path, body);
      res.status = r.status;
      res.set_content(r.body.dump(2) + "\n", "application/json");
    };
    http_.Get(".*", handler);
    http_.Post(".*", handler);
    http_.Put(".*", handler);
  }

  DaemonConfig cfg_;
  SnapshotHolder<PipelineTables> holder_{std::make_shared<const PipelineTables>()};
  ControlPlane cp_;
  mutable std::mutex control_mu_;
  Counters counters_;
  std::array<InstanceStats, kMaxInstances> stats_{};
  std::atomic<std::uint64_t> send_errors_{0};
  std::vector<std::unique_ptr<Worker>> workers_;
  httplib::Server http_;
  std::thread http_thread_;
  std::thread housekeeping_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stopping_{false};
  std::mutex wake_mu_;
  std::condition_variable wake_;
};

}  // namespace ejfat::daemon
