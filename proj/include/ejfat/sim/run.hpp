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
#include <cmath>
#include <deque>
#include <fstream>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <thread>
#include <unordered_map>
#include <vector>

#include "ejfat/bytes.hpp"
#include "ejfat/control_plane.hpp"
#include "ejfat/pipeline.hpp"
#include "ejfat/reassembly.hpp"
#include "ejfat/segment.hpp"
#include "ejfat/sim/scenario.hpp"

namespace ejfat::sim {

struct EpochReport {
  std::string label;
  EpochId epoch = 0;
  std::uint64_t boundary_event = 0;
  std::optional<std::uint64_t> activated_at_packet;
  std::optional<std::uint64_t> cleaned_at_packet;
  std::map<std::uint32_t, std::size_t> calendar_slots;  // cn -> slots
  std::map<std::uint32_t, std::uint64_t> cn_events;     // cn -> events delivered
  std::uint64_t events = 0;
};

struct TraceRecord {
  enum class Direction : std::uint8_t { DaqTx, LbIn, CnRx };
  Direction direction = Direction::LbIn;
  std::uint64_t timestamp_ns = 0;
  std::uint64_t event_number = 0;
  std::uint16_t entropy = 0;
  Endpoint src;
  Endpoint dst;
  std::size_t size = 0;
  std::int32_t daq = -1;
  std::int32_t cn = -1;
};

struct ScenarioReport {
  std::uint64_t seed = 0;
  std::uint64_t packets_generated = 0;  // good packets from DAQs
  std::uint64_t junk_packets = 0;
  std::uint64_t impairment_dropped = 0;
  CounterValues lb;
  std::array<std::uint64_t, kDiscardReasonCount> deliberate_discards{};  // expected, per reason
  std::uint64_t packets_delivered = 0;
  std::uint64_t misdirected_packets = 0;
  std::int64_t lost_packets = 0;
  std::uint64_t events_total = 0;
  std::uint64_t split_events = 0;
  std::uint64_t split_bundles = 0;
  std::uint64_t bundles_total = 0;
  std::uint64_t bundles_completed = 0;
  std::uint64_t bundles_corrupt = 0;
  std::uint64_t bundles_lost = 0;
  std::vector<EpochReport> epochs;
  std::map<std::pair<std::uint32_t, std::uint16_t>, std::uint64_t> port_packets;  // (cn, port)
  /// Final CN for each event, in event order; used to compare runs.
  std::map<std::uint64_t, std::uint32_t> event_assignment;
  double slot_chi_square = 0.0;
  std::vector<TraceRecord> traces;

  std::uint64_t deliberate_total() const noexcept {
    std::uint64_t s = 0;
    for (auto d : deliberate_discards) s += d;
    return s;
  }

  /// packets into the balancer == forwarded + expected discards, and every
  /// discard reason matches what was injected on purpose.
  bool conservation_ok() const noexcept {
    return lb.packets_in == lb.packets_out + deliberate_total() && lb.discards == deliberate_discards &&
           lb.packets_out == packets_delivered;
  }
};

namespace detail {

inline IpAddress host_address(AddressFamily f, std::uint8_t net, std::uint32_t host) {
  if (f == AddressFamily::V4)
    return IpAddress::v4({10, net, static_cast<std::uint8_t>(host >> 8), static_cast<std::uint8_t>(host)});
  std::array<std::uint8_t, 16> o{0xfd, 0x00, 0, net};
  o[14] = static_cast<std::uint8_t>(host >> 8);
  o[15] = static_cast<std::uint8_t>(host);
  return IpAddress::v6(o);
}

struct PacketMeta {
  std::uint64_t event = 0;
  std::uint32_t daq = 0;
  std::uint32_t bundle = 0;  // index into bundle truth; junk packets ignore
  std::optional<DiscardReason> junk;
  std::uint64_t tx_ns = 0;
};

struct BundleTruth {
  std::uint64_t event = 0;
  std::uint32_t daq = 0;
  std::uint16_t entropy = 0;
  std::uint64_t hash = 0;
  std::size_t size = 0;
};

inline const MacAddress kSimLbMac({0x02, 0x4c, 0x42, 0x00, 0x00, 0x01});

}  // namespace detail

/// The balancer's addresses in a scenario.
inline IpAddress scenario_lb_address(AddressFamily f) { return detail::host_address(f, 0, 1); }
inline IpAddress scenario_daq_address(AddressFamily f, std::uint32_t daq) {
  return detail::host_address(f, 1, daq + 1);
}
inline IpAddress scenario_cn_address(AddressFamily f, std::uint32_t cn) { return detail::host_address(f, 2, cn + 1); }

inline MemberSpec scenario_member(const ScenarioConfig& c, std::uint32_t cn, double weight) {
  MemberSpec m;
  m.member = cn;
  m.cn_ipv4 = scenario_cn_address(AddressFamily::V4, cn);
  m.cn_ipv6 = scenario_cn_address(AddressFamily::V6, cn);
  m.next_hop_mac = MacAddress({0x02, 0xc0, 0, 0, static_cast<std::uint8_t>(cn >> 8), static_cast<std::uint8_t>(cn)});
  m.udp_base_port = c.cn_base_port;
  m.entropy_bits = c.cn_entropy_bits;
  m.weight = weight;
  return m;
}

inline EpochPlan scenario_plan(const ScenarioConfig& c, std::size_t index) {
  const auto& e = c.epochs[index];
  EpochPlan p;
  p.instance = 0;
  p.epoch = static_cast<EpochId>(index);
  p.boundary_event = e.boundary_event;
  for (const auto& m : e.members) p.members.push_back(scenario_member(c, m.cn, m.weight));
  return p;
}

/// Runs one scenario end to end: DAQ emulation, impairment, the balancer
/// under a live epoch schedule, CN reassembly and accounting. Deterministic
/// for a given config, including the number of workers.
inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  using detail::BundleTruth;
  using detail::PacketMeta;

  ScenarioReport rep;
  rep.seed = cfg.seed;
  std::mt19937_64 rng(cfg.seed);
  const Endpoint lb_service{scenario_lb_address(cfg.family), kLbServicePort};

  // DAQ emulation. All DAQs share one event counter; their segments for an
  // event leave in parallel and merge at the balancer input port.
  std::vector<DaqPacket> packets;
  std::vector<PacketMeta> meta;
  std::vector<BundleTruth> bundles;
  std::uniform_int_distribution<std::size_t> size_dist(cfg.bundle_min, cfg.bundle_max);
  std::uniform_real_distribution<double> junk_roll(0.0, 1.0);
  std::uint16_t seq_entropy = 0;
  std::uint64_t tx_clock = 0;

  auto add_junk = [&](std::uint64_t event) {
    static constexpr std::array<DiscardReason, 6> kinds = {DiscardReason::L2Reject, DiscardReason::L3Reject,
                                                           DiscardReason::NotLbPort, DiscardReason::BadMagic,
                                                           DiscardReason::BadVersion, DiscardReason::Truncated};
    DiscardReason kind = kinds[rng() % kinds.size()];
    if (kind == DiscardReason::L2Reject && cfg.mode == PipelineMode::Socket) kind = DiscardReason::L3Reject;
    const std::array<std::uint8_t, 8> junk_payload{0xde, 0xad, 0xbe, 0xef, 0, 1, 2, 3};
    auto p = DaqPacket::make(Endpoint{scenario_daq_address(cfg.family, 0), 40000}, lb_service,
                             LbHeader{kDefaultLbVersion, 1, 0, 0, event}, junk_payload);
    p.link = LinkInfo{0, MacAddress({0x02, 0xda, 0, 0, 0, 0}), detail::kSimLbMac};
    switch (kind) {
      case DiscardReason::L2Reject: p.link->dst_mac = MacAddress({0x02, 0x99, 0, 0, 0, 1}); break;
      case DiscardReason::L3Reject: p.dst.addr = detail::host_address(cfg.family, 9, 9); break;
      case DiscardReason::NotLbPort: p.dst.port = 9; break;
      case DiscardReason::BadMagic: p.udp_payload[1] = 'X'; break;
      case DiscardReason::BadVersion: p.udp_payload[2] = static_cast<std::uint8_t>(kDefaultLbVersion + 1); break;
      default: p.udp_payload.resize(7); break;
    }
    packets.push_back(std::move(p));
    meta.push_back(PacketMeta{event, 0, 0, kind, tx_clock});
    ++rep.deliberate_discards[static_cast<std::size_t>(kind)];
    ++rep.junk_packets;
  };

  for (std::uint64_t ev = cfg.first_event; ev < cfg.first_event + cfg.event_count; ++ev) {
    std::vector<std::vector<DaqPacket>> per_daq(cfg.daq_count);
    std::vector<std::uint32_t> bundle_index(cfg.daq_count);
    for (std::uint32_t d = 0; d < cfg.daq_count; ++d) {
      std::vector<std::uint8_t> bundle(size_dist(rng));
      for (std::size_t i = 0; i < bundle.size(); i += 8) {
        const std::uint64_t r = rng();
        for (std::size_t k = 0; k < 8 && i + k < bundle.size(); ++k) bundle[i + k] = static_cast<std::uint8_t>(r >> (8 * k));
      }
      const std::uint16_t entropy = cfg.sequential_entropy ? seq_entropy++ : static_cast<std::uint16_t>(rng());
      SegmentParams sp;
      sp.event_number = ev;
      sp.entropy = entropy;
      sp.data_source_id = static_cast<std::uint16_t>(d);
      sp.mtu_payload = cfg.mtu_payload;
      sp.src = Endpoint{scenario_daq_address(cfg.family, d), static_cast<std::uint16_t>(50000 + d)};
      sp.dst = lb_service;
      per_daq[d] = segment_bundle(bundle, sp);
      bundle_index[d] = static_cast<std::uint32_t>(bundles.size());
      bundles.push_back(BundleTruth{ev, d, entropy, fnv1a(bundle), bundle.size()});
    }
    const std::uint64_t event_tx = (ev - cfg.first_event) * cfg.event_period_ns;
    tx_clock = std::max(tx_clock, event_tx);
    for (std::size_t k = 0;; ++k) {
      bool any = false;
      for (std::uint32_t d = 0; d < cfg.daq_count; ++d) {
        if (k >= per_daq[d].size()) continue;
        any = true;
        DaqPacket p = std::move(per_daq[d][k]);
        p.link = LinkInfo{static_cast<std::uint16_t>(d % 4), MacAddress({0x02, 0xda, 0, 0, 0, static_cast<std::uint8_t>(d)}),
                          detail::kSimLbMac};
        packets.push_back(std::move(p));
        meta.push_back(PacketMeta{ev, d, bundle_index[d], std::nullopt, tx_clock});
        tx_clock += cfg.packet_time_ns;
        ++rep.packets_generated;
        if (cfg.junk.fraction > 0 && junk_roll(rng) < cfg.junk.fraction) add_junk(ev);
      }
      if (!any) break;
    }
  }
  rep.bundles_total = bundles.size();
  rep.events_total = cfg.event_count;

  if (cfg.record_traces)
    for (std::size_t i = 0; i < packets.size(); ++i) {
      const auto& p = packets[i];
      TraceRecord t{TraceRecord::Direction::DaqTx, meta[i].tx_ns, meta[i].event, 0, p.src, p.dst, p.udp_payload.size(),
                    static_cast<std::int32_t>(meta[i].daq), -1};
      if (auto h = decode_lb_header(p.udp_payload); std::holds_alternative<LbHeader>(h))
        t.entropy = std::get<LbHeader>(h).entropy;
      rep.traces.push_back(t);
    }

  // Network between the DAQs and the balancer.
  const auto arrival = impair_order(packets.size(), cfg.impairment, cfg.seed ^ 0x9e3779b97f4a7c15ull);
  rep.impairment_dropped = arrival.dropped.size();
  for (std::size_t i : arrival.dropped)
    if (meta[i].junk) --rep.deliberate_discards[static_cast<std::size_t>(*meta[i].junk)];

  // Control plane: decide which table snapshot each arriving packet sees.
  // Only header facts the balancer itself observes drive the decisions.
  PipelineTables initial;
  add_lb_address(initial, 0, scenario_lb_address(AddressFamily::V4), detail::kSimLbMac);
  add_lb_address(initial, 0, scenario_lb_address(AddressFamily::V6), detail::kSimLbMac);
  initial = activate_epoch(scenario_plan(cfg, 0), initial);

  rep.epochs.resize(cfg.epochs.size());
  for (std::size_t k = 0; k < cfg.epochs.size(); ++k) {
    rep.epochs[k].label = cfg.epochs[k].label;
    rep.epochs[k].epoch = static_cast<EpochId>(k);
    rep.epochs[k].boundary_event = cfg.epochs[k].boundary_event;
  }
  std::vector<Calendar> truth_calendars(cfg.epochs.size());
  auto record_calendar = [&](std::size_t k, const PipelineTables& t) {
    truth_calendars[k] = *t.find_calendar(0, static_cast<EpochId>(k));
    for (auto [m, n] : truth_calendars[k].histogram()) rep.epochs[k].calendar_slots[m] = n;
  };
  record_calendar(0, initial);
  rep.epochs[0].activated_at_packet = 0;

  std::vector<std::shared_ptr<const PipelineTables>> snapshots{std::make_shared<const PipelineTables>(initial)};
  std::vector<std::uint32_t> snapshot_of(arrival.order.size());
  std::deque<PipelineTables> queued;
  PipelineTables live = initial;
  std::size_t next_epoch = 1;
  std::uint64_t max_seen = 0;
  bool seen_any = false;
  // For each retired epoch k: arrival position of the first event >= the
  // boundary that ended it.
  std::vector<std::optional<std::uint64_t>> ended_at(cfg.epochs.size());
  std::size_t next_cleanup = 0;
  const std::uint64_t headroom = cfg.effective_headroom();
  const std::uint64_t quiesce = cfg.effective_quiesce();
  auto queue_step = [&](const PipelineTables& s) { queued.push_back(s); };

  for (std::size_t pos = 0; pos < arrival.order.size(); ++pos) {
    if (queued.empty()) {
      if (next_epoch < cfg.epochs.size() && seen_any &&
          max_seen + headroom >= cfg.epochs[next_epoch].boundary_event) {
        live = activate_epoch(scenario_plan(cfg, next_epoch), live, queue_step);
        record_calendar(next_epoch, live);
        rep.epochs[next_epoch].activated_at_packet = pos;
        ++next_epoch;
      } else if (next_cleanup + 1 < next_epoch && ended_at[next_cleanup] &&
                 pos - *ended_at[next_cleanup] >= quiesce) {
        live = cleanup_epoch(0, static_cast<EpochId>(next_cleanup), live, queue_step);
        rep.epochs[next_cleanup].cleaned_at_packet = pos;
        ++next_cleanup;
      }
    }
    if (!queued.empty()) {
      snapshots.push_back(std::make_shared<const PipelineTables>(std::move(queued.front())));
      queued.pop_front();
    }
    snapshot_of[pos] = static_cast<std::uint32_t>(snapshots.size() - 1);

    const DaqPacket& p = packets[arrival.order[pos]];
    const bool l2_ok = cfg.mode == PipelineMode::Socket || (p.link && p.link->dst_mac == detail::kSimLbMac);
    if (l2_ok && p.dst == lb_service)
      if (auto h = decode_lb_header(p.udp_payload); std::holds_alternative<LbHeader>(h)) {
        const std::uint64_t ev = std::get<LbHeader>(h).event_number;
        max_seen = seen_any ? std::max(max_seen, ev) : ev;
        seen_any = true;
        for (std::size_t k = next_cleanup; k + 1 < next_epoch; ++k)
          if (!ended_at[k] && ev >= cfg.epochs[k + 1].boundary_event) ended_at[k] = pos;
      }
  }

  // Data plane: the per-packet decision against the chosen snapshot. Pure,
  // so it can be spread over workers without changing any result.
  std::vector<PipelineResult> results(arrival.order.size(), PipelineResult{Discard{DiscardReason::NoEpoch}});
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t pos = begin; pos < end; ++pos)
      results[pos] = process_packet(packets[arrival.order[pos]].view(), *snapshots[snapshot_of[pos]], cfg.mode);
  };
  if (cfg.workers <= 1) {
    work(0, results.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (results.size() + cfg.workers - 1) / cfg.workers;
    for (std::size_t w = 0; w < cfg.workers; ++w) {
      const std::size_t b = std::min(results.size(), w * chunk), e = std::min(results.size(), b + chunk);
      threads.emplace_back(work, b, e);
    }
    for (auto& t : threads) t.join();
  }

  // Compute nodes and accounting.
  std::map<IpAddress, std::uint32_t> cn_by_ip;
  for (std::uint32_t cn = 0; cn < cfg.cn_count; ++cn) cn_by_ip[scenario_cn_address(cfg.family, cn)] = cn;
  std::map<std::pair<std::uint32_t, std::uint16_t>, Reassembler> sinks;
  std::map<BundleKey, std::uint32_t> bundle_of;
  for (std::uint32_t b = 0; b < bundles.size(); ++b)
    bundle_of[BundleKey{static_cast<std::uint16_t>(bundles[b].daq), bundles[b].event}] = b;
  struct Dest {
    std::uint32_t cn = 0;
    std::uint16_t port = 0;
    bool split = false;
    bool set = false;
  };
  std::vector<Dest> bundle_dest(bundles.size());
  std::unordered_map<std::uint64_t, Dest> event_dest;
  std::array<std::uint64_t, kCalendarSlots> slot_hist{};

  auto truth_epoch = [&](std::uint64_t ev) {
    std::size_t k = 0;
    while (k + 1 < cfg.epochs.size() && ev >= cfg.epochs[k + 1].boundary_event) ++k;
    return k;
  };

  for (std::size_t pos = 0; pos < results.size(); ++pos) {
    const std::size_t idx = arrival.order[pos];
    const PacketMeta& m = meta[idx];
    const std::uint64_t now_ns = pos * cfg.packet_time_ns;
    ++rep.lb.packets_in;
    if (cfg.record_traces) {
      const auto& p = packets[idx];
      rep.traces.push_back(TraceRecord{TraceRecord::Direction::LbIn, now_ns, m.event, 0, p.src, p.dst,
                                       p.udp_payload.size(), static_cast<std::int32_t>(m.daq), -1});
    }
    if (auto* d = std::get_if<Discard>(&results[pos])) {
      ++rep.lb.discards[static_cast<std::size_t>(d->reason)];
      continue;
    }
    ++rep.lb.packets_out;
    const auto& f = std::get<Forwarded>(results[pos]);
    auto cn_it = cn_by_ip.find(f.packet.dst.addr);
    if (cn_it == cn_by_ip.end() || m.junk) {
      ++rep.misdirected_packets;
      continue;
    }
    const std::uint32_t cn = cn_it->second;
    ++rep.packets_delivered;
    ++rep.port_packets[{cn, f.packet.dst.port}];
    if (cfg.record_traces)
      rep.traces.push_back(TraceRecord{TraceRecord::Direction::CnRx, now_ns, m.event, f.header.entropy, f.packet.src,
                                       f.packet.dst, f.packet.payload.size(), static_cast<std::int32_t>(m.daq),
                                       static_cast<std::int32_t>(cn)});

    const std::size_t k = truth_epoch(m.event);
    if (truth_calendars[k][slot_of(m.event)] != cn) ++rep.misdirected_packets;

    auto& ed = event_dest[m.event];
    if (!ed.set) {
      ed = Dest{cn, 0, false, true};
      ++rep.epochs[k].events;
      ++rep.epochs[k].cn_events[cn];
      ++slot_hist[slot_of(m.event)];
    } else if (ed.cn != cn && !ed.split) {
      ed.split = true;
      ++rep.split_events;
    }
    auto& bd = bundle_dest[m.bundle];
    if (!bd.set) {
      bd = Dest{cn, f.packet.dst.port, false, true};
    } else if ((bd.cn != cn || bd.port != f.packet.dst.port) && !bd.split) {
      bd.split = true;
      ++rep.split_bundles;
    }

    auto out = sinks[{cn, f.packet.dst.port}].add(f.packet.payload, std::chrono::nanoseconds(now_ns));
    if (out.status == ReassemblyStatus::Completed) {
      auto b = bundle_of.find(out.key);
      if (b != bundle_of.end() && bundles[b->second].hash == fnv1a(out.bundle) &&
          bundles[b->second].size == out.bundle.size())
        ++rep.bundles_completed;
      else
        ++rep.bundles_corrupt;
    } else if (out.status == ReassemblyStatus::CorruptSegment) {
      ++rep.bundles_corrupt;
    }
  }
  rep.bundles_lost = rep.bundles_total - rep.bundles_completed - rep.bundles_corrupt;
  for (const auto& [ev, d] : event_dest) rep.event_assignment[ev] = d.cn;

  rep.lost_packets = static_cast<std::int64_t>(rep.packets_generated + rep.junk_packets) -
                     static_cast<std::int64_t>(rep.impairment_dropped) -
                     static_cast<std::int64_t>(rep.packets_delivered) -
                     static_cast<std::int64_t>(rep.deliberate_total());

  std::uint64_t observed = 0;
  for (auto h : slot_hist) observed += h;
  if (observed) {
    const double expect = static_cast<double>(observed) / kCalendarSlots;
    for (auto h : slot_hist) rep.slot_chi_square += (static_cast<double>(h) - expect) * (static_cast<double>(h) - expect) / expect;
  }
  return rep;
}

inline Json report_to_json(const ScenarioReport& r) {
  Json discards = Json::object(), deliberate = Json::object();
  for (auto reason : kAllDiscardReasons) {
    discards[std::string(to_string(reason))] = r.lb.discarded(reason);
    deliberate[std::string(to_string(reason))] = r.deliberate_discards[static_cast<std::size_t>(reason)];
  }
  Json epochs = Json::array();
  for (const auto& e : r.epochs) {
    Json slots = Json::object(), events = Json::object();
    for (auto [cn, n] : e.calendar_slots) slots["CN-" + std::to_string(cn)] = n;
    for (auto [cn, n] : e.cn_events) events["CN-" + std::to_string(cn)] = n;
    epochs.push_back({{"label", e.label},
                      {"epoch", e.epoch},
                      {"boundary_event", e.boundary_event},
                      {"activated_at_packet", e.activated_at_packet ? Json(*e.activated_at_packet) : Json(nullptr)},
                      {"cleaned_at_packet", e.cleaned_at_packet ? Json(*e.cleaned_at_packet) : Json(nullptr)},
                      {"calendar_slots", slots},
                      {"events", e.events},
                      {"cn_events", events}});
  }
  Json ports = Json::array();
  for (const auto& [key, n] : r.port_packets)
    ports.push_back({{"cn", key.first}, {"port", key.second}, {"packets", n}});
  return Json{{"seed", r.seed},
              {"packets_generated", r.packets_generated},
              {"junk_packets", r.junk_packets},
              {"impairment_dropped", r.impairment_dropped},
              {"lb_packets_in", r.lb.packets_in},
              {"lb_packets_out", r.lb.packets_out},
              {"lb_discards", discards},
              {"deliberate_discards", deliberate},
              {"packets_delivered", r.packets_delivered},
              {"misdirected_packets", r.misdirected_packets},
              {"lost_packets", r.lost_packets},
              {"events_total", r.events_total},
              {"split_events", r.split_events},
              {"split_bundles", r.split_bundles},
              {"bundles_total", r.bundles_total},
              {"bundles_completed", r.bundles_completed},
              {"bundles_corrupt", r.bundles_corrupt},
              {"bundles_lost", r.bundles_lost},
              {"conservation_ok", r.conservation_ok()},
              {"slot_chi_square", r.slot_chi_square},
              {"epochs", epochs},
              {"port_packets", ports}};
}

/// Writes report.json plus one CSV per trace direction (daq_tx.csv,
/// lb_in.csv, cn_rx.csv) into `dir`.
inline void write_report(const ScenarioReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "report.json") << report_to_json(r).dump(2) << "\n";
  const char* names[] = {"daq_tx.csv", "lb_in.csv", "cn_rx.csv"};
  for (int d = 0; d < 3; ++d) {
    std::ofstream out(dir / names[d]);
    out << "direction,timestamp_ns,event_number,entropy,src,dst,size,daq,cn\n";
    for (const auto& t : r.traces) {
      if (static_cast<int>(t.direction) != d) continue;
      static const char* dir_names[] = {"daq_tx", "in", "out"};
      out << dir_names[d] << ',' << t.timestamp_ns << ',' << t.event_number << ',' << t.entropy << ','
          << t.src.to_string() << ',' << t.dst.to_string() << ',' << t.size << ',' << t.daq << ',' << t.cn << '\n';
    }
  }
}

}  // namespace ejfat::sim
