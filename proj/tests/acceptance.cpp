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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here, not tuned per run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "ejfat/bench.hpp"
#include "ejfat/lb_header.hpp"
#include "ejfat/lpm.hpp"
#include "ejfat/prefix_range.hpp"
#include "ejfat/reassembly.hpp"
#include "ejfat/segment.hpp"
#include "ejfat/sim/run.hpp"
#include "live_rig.hpp"
#include "oracles.hpp"

using namespace ejfat;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 2) {
  std::ostringstream s;
  s.precision(prec);
  s << std::fixed << v;
  return s.str();
}

// Criteria 1 and 2 share the same 20 runs.
struct SimRuns {
  std::vector<sim::ScenarioReport> reports;
  std::vector<std::size_t> windows;
  double seconds = 0;
};

sim::ScenarioConfig acceptance_scenario(std::uint64_t seed) {
  auto c = sim::figure6_scenario(seed);
  // Windows of 500, 1000, 1500 and 2000 packets; every second run uses the
  // exponential model with the window as its clip.
  c.impairment.reorder_window = 500 * (1 + seed % 4);
  c.impairment.delay = seed % 2 ? sim::DelayModel::Exponential : sim::DelayModel::Uniform;
  c.impairment.mean_delay = static_cast<double>(c.impairment.reorder_window) / 4;
  c.junk.fraction = 0.01;
  c.workers = 4;
  return c;
}

const SimRuns& sim_runs() {
  static const SimRuns runs = [] {
    SimRuns r;
    const auto t0 = Clock::now();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto c = acceptance_scenario(seed);
      r.windows.push_back(c.impairment.reorder_window);
      r.reports.push_back(sim::run_scenario(c));
    }
    r.seconds = seconds_since(t0);
    return r;
  }();
  return runs;
}

Verdict atomic_event_delivery() {
  const auto& runs = sim_runs();
  std::uint64_t splits = 0, split_bundles = 0, min_packets = UINT64_MAX, epochs_ok = 0;
  for (const auto& r : runs.reports) {
    splits += r.split_events;
    split_bundles += r.split_bundles;
    min_packets = std::min(min_packets, r.packets_generated);
    epochs_ok += r.epochs.size() == 3 && std::all_of(r.epochs.begin(), r.epochs.end(),
                                                      [](const auto& e) { return e.activated_at_packet.has_value(); });
  }
  const std::size_t max_window = *std::max_element(runs.windows.begin(), runs.windows.end());
  const bool pass = runs.reports.size() == 20 && splits == 0 && split_bundles == 0 && min_packets >= 100'000 &&
                    epochs_ok == 20 && max_window == 2000 && runs.seconds < 120.0;
  return {pass, "20 runs, 5 DAQs, 10 CNs, 3 epochs, window up to " + std::to_string(max_window) +
                    ": split events " + std::to_string(splits) + ", split bundles " + std::to_string(split_bundles) +
                    ", fewest packets in a run " + std::to_string(min_packets) + ", " + fmt(runs.seconds, 1) + " s"};
}

Verdict hitless_reconfiguration() {
  const auto& runs = sim_runs();
  std::uint64_t bad_conservation = 0, no_epoch = 0, empty_slot = 0, lost = 0, deliberate = 0, switches = 0;
  for (const auto& r : runs.reports) {
    bad_conservation += !r.conservation_ok();
    no_epoch += r.lb.discarded(DiscardReason::NoEpoch);
    empty_slot += r.lb.discarded(DiscardReason::EmptySlot);
    lost += static_cast<std::uint64_t>(std::llabs(r.lost_packets)) + r.bundles_lost + r.bundles_corrupt;
    deliberate += r.deliberate_total();
    for (const auto& e : r.epochs) switches += e.cleaned_at_packet.has_value();
  }
  const bool pass = bad_conservation == 0 && no_epoch == 0 && empty_slot == 0 && lost == 0 && deliberate > 0;
  return {pass, "in == out + deliberate discards in " + std::to_string(20 - bad_conservation) +
                    "/20 runs (" + std::to_string(deliberate) + " deliberate), NoEpoch " + std::to_string(no_epoch) +
                    ", EmptySlot " + std::to_string(empty_slot) + ", lost " + std::to_string(lost) +
                    ", retired epochs cleaned " + std::to_string(switches)};
}

Verdict weighted_distribution() {
  const std::vector<std::uint64_t> weights{1, 1, 2};
  const auto expect_slots = oracle::hamilton(weights, kCalendarSlots);  // {128, 128, 256}
  std::vector<MemberSpec> ms;
  for (MemberId m = 0; m < 3; ++m) {
    MemberSpec s;
    s.member = m;
    s.cn_ipv4 = IpAddress::v4({10, 0, 0, static_cast<std::uint8_t>(m + 1)});
    s.udp_base_port = 20000;
    s.weight = static_cast<double>(weights[m]);
    ms.push_back(s);
  }
  PipelineTables t;
  const Endpoint lb{IpAddress::v4({192, 0, 2, 1}), kLbServicePort};
  add_lb_address(t, 0, lb.addr);
  t = activate_epoch(EpochPlan{0, 0, 0, ms, std::nullopt}, t);

  auto count = [&](auto&& events) {
    std::array<std::uint64_t, 3> n{};
    for (std::uint64_t ev : events) {
      const auto p = DaqPacket::make(Endpoint{IpAddress::v4({198, 51, 100, 1}), 4000}, lb,
                                     LbHeader{kDefaultLbVersion, 1, 0, 0, ev}, std::span<const std::uint8_t>{});
      const auto r = process_packet(p.view(), t, PipelineMode::Socket);
      if (const auto* f = std::get_if<Forwarded>(&r)) ++n.at(f->member);
    }
    return n;
  };

  std::mt19937_64 rng(3);
  bool sweeps_exact = true;
  for (std::uint64_t k : {1u, 2u, 7u, 64u}) {
    const std::uint64_t start = rng() % (UINT64_MAX - k * kCalendarSlots);
    std::vector<std::uint64_t> evs;
    for (std::uint64_t i = 0; i < k * kCalendarSlots; ++i) evs.push_back(start + i);
    const auto n = count(evs);
    for (std::size_t m = 0; m < 3; ++m) sweeps_exact &= n[m] == expect_slots[m] * k;
  }

  constexpr std::uint64_t kDraws = 100'000;
  std::vector<std::uint64_t> evs(kDraws);
  for (auto& e : evs) e = rng();
  const auto n = count(evs);
  const double wsum = 4.0;
  double worst_sigma = 0;
  for (std::size_t m = 0; m < 3; ++m) {
    const double p = static_cast<double>(weights[m]) / wsum;
    const double sigma = std::sqrt(kDraws * p * (1 - p));
    worst_sigma = std::max(worst_sigma, std::abs(static_cast<double>(n[m]) - kDraws * p) / sigma);
  }
  const bool pass = sweeps_exact && expect_slots == std::vector<std::size_t>{128, 128, 256} && worst_sigma <= 3.0;
  return {pass, std::string("k*512 sweeps ") + (sweeps_exact ? "exact" : "MISMATCH") + " against {128,128,256}*k; " +
                    "1e5 random events: counts " + std::to_string(n[0]) + "/" + std::to_string(n[1]) + "/" +
                    std::to_string(n[2]) + ", worst deviation " + fmt(worst_sigma) + " sigma (limit 3)"};
}

Verdict lpm_equivalence() {
  std::mt19937_64 rng(4);
  std::uint64_t mismatches = 0, keys = 0;
  for (int table = 0; table < 1000; ++table) {
    std::map<std::pair<std::uint16_t, unsigned>, int> entries;
    const int n = 1 + static_cast<int>(rng() % 32);
    for (int i = 0; i < n; ++i) {
      const unsigned len = static_cast<unsigned>(rng() % 17);
      const auto value = static_cast<std::uint16_t>(rng() & Prefix<std::uint16_t>::mask(len));
      entries[{value, len}] = static_cast<int>(rng() % 1000);
    }
    LpmTrie<std::uint16_t, int> trie;
    std::vector<std::pair<oracle::ToyPrefix, int>> linear;
    for (const auto& [k, v] : entries) {
      trie.insert(Prefix<std::uint16_t>{k.first, k.second}, v);
      linear.push_back({oracle::ToyPrefix{k.first, k.second}, v});
    }
    for (std::uint32_t key = 0; key <= 0xffff; ++key, ++keys) {
      const int* got = trie.lookup(static_cast<std::uint16_t>(key));
      const auto want = oracle::linear_lpm(linear, key, 16);
      if ((got != nullptr) != want.has_value() || (got && *got != *want)) ++mismatches;
    }
  }
  return {mismatches == 0, "1000 random tables, " + std::to_string(keys) + " lookups, " +
                               std::to_string(mismatches) + " differ from the linear scan"};
}

Verdict range_cover() {
  std::mt19937_64 rng(5);
  std::uint64_t bad = 0, total_prefixes = 0;
  for (int i = 0; i < 1000; ++i) {
    auto a = static_cast<std::uint16_t>(rng()), b = static_cast<std::uint16_t>(rng());
    if (i == 0) a = 0, b = 0xffff;
    if (a > b) std::swap(a, b);
    std::vector<oracle::ToyPrefix> ps;
    for (const auto& p : range_to_prefixes_inclusive<std::uint16_t>(a, b)) ps.push_back({p.value, p.length});
    total_prefixes += ps.size();
    const auto hits = oracle::coverage(ps, 16);
    for (std::uint32_t k = 0; k <= 0xffff; ++k)
      if (hits[k] != (k >= a && k <= b ? 1 : 0)) {  // 1 also rules out overlap
        ++bad;
        break;
      }
  }
  return {bad == 0, "1000 random ranges (" + std::to_string(total_prefixes) + " prefixes): " + std::to_string(bad) +
                        " with a gap, overflow or overlap"};
}

Verdict entropy_spreading() {
  MemberSpec s;
  s.member = 0;
  s.cn_ipv4 = IpAddress::v4({10, 0, 0, 1});
  s.udp_base_port = 30000;
  s.entropy_bits = 3;
  PipelineTables t;
  const Endpoint lb{IpAddress::v4({192, 0, 2, 1}), kLbServicePort};
  add_lb_address(t, 0, lb.addr);
  t = activate_epoch(EpochPlan{0, 0, 0, {s}, std::nullopt}, t);
  std::map<std::uint16_t, std::uint64_t> ports;
  for (std::uint32_t e = 0; e <= 0xffff; ++e) {
    const auto p = DaqPacket::make(Endpoint{IpAddress::v4({198, 51, 100, 1}), 4000}, lb,
                                   LbHeader{kDefaultLbVersion, 1, 0, static_cast<std::uint16_t>(e), 77},
                                   std::span<const std::uint8_t>{});
    const auto r = process_packet(p.view(), t, PipelineMode::Socket);
    if (const auto* f = std::get_if<Forwarded>(&r)) ++ports[f->packet.dst.port];
  }
  bool exact = ports.size() == 8;
  for (std::uint16_t port = 30000; port < 30008; ++port) exact &= ports[port] == 8192;
  std::string counts;
  for (auto [p, n] : ports) counts += (counts.empty() ? "" : " ") + std::to_string(n);
  return {exact, "width 3, 65536 entropy values over " + std::to_string(ports.size()) + " ports: " + counts};
}

Verdict segmentation_round_trip() {
  std::mt19937_64 rng(7);
  std::uint64_t bad = 0, segments = 0, dups = 0;
  Reassembler r(ReassemblyOptions{});
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const std::size_t size = rng() % ((std::size_t{1} << 20) + 1);
    std::vector<std::uint8_t> bundle(size);
    for (std::size_t k = 0; k < size; k += 8) {
      const std::uint64_t v = rng();
      for (std::size_t j = 0; j < 8 && k + j < size; ++j) bundle[k + j] = static_cast<std::uint8_t>(v >> (8 * j));
    }
    SegmentParams sp;
    sp.event_number = i;
    sp.data_source_id = static_cast<std::uint16_t>(rng());
    sp.entropy = static_cast<std::uint16_t>(rng());
    sp.mtu_payload = std::array<std::size_t, 4>{100, 1000, 1500, 8000}[rng() % 4];
    auto packets = segment_bundle(bundle, sp);
    std::vector<std::size_t> order(packets.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = 0; k < packets.size(); ++k)
      if (rng() % 10 == 0) order.push_back(k), ++dups;
    std::shuffle(order.begin(), order.end(), rng);
    segments += order.size();
    int completions = 0;
    bool match = true;
    for (std::size_t k : order) {
      auto out = r.add(packets[k].payload(), std::chrono::nanoseconds(0));
      if (out.status == ReassemblyStatus::Completed) {
        ++completions;
        match &= out.bundle == bundle;
      } else if (out.status != ReassemblyStatus::Pending && out.status != ReassemblyStatus::Duplicate) {
        match = false;
      }
    }
    bad += !(completions == 1 && match);
  }
  return {bad == 0, "1000 bundles up to 1 MiB, " + std::to_string(segments) + " segments incl. " +
                        std::to_string(dups) + " duplicates, shuffled: " + std::to_string(bad) + " not octet-identical"};
}

Verdict codec() {
  const std::array<std::uint64_t, 6> events{0, 1, 511, 512, std::uint64_t{1} << 32, UINT64_MAX};
  std::uint64_t round_trips = 0, bad = 0;
  for (std::uint64_t ev : events)
    for (std::uint32_t e = 0; e <= 0xffff; ++e) {
      const LbHeader h{kDefaultLbVersion, 1, 0, static_cast<std::uint16_t>(e), ev};
      std::array<std::uint8_t, kLbHeaderSize> buf{};
      encode_lb_header(h, buf);
      // Independent byte layout: 'L' 'B' version protocol rsvd(2) entropy(2) event(8), big-endian.
      std::array<std::uint8_t, kLbHeaderSize> want{'L', 'B', kDefaultLbVersion, 1, 0, 0,
                                                   static_cast<std::uint8_t>(e >> 8), static_cast<std::uint8_t>(e)};
      for (int k = 0; k < 8; ++k) want[8 + k] = static_cast<std::uint8_t>(ev >> (56 - 8 * k));
      const auto back = decode_lb_header(buf);
      ++round_trips;
      if (buf != want || !std::holds_alternative<LbHeader>(back) || std::get<LbHeader>(back) != h) ++bad;
    }
  std::uint64_t invalid = 0, wrong_reason = 0;
  auto expect = [&](std::span<const std::uint8_t> bytes, DiscardReason reason) {
    ++invalid;
    const auto r = decode_lb_header(bytes);
    if (!std::holds_alternative<Discard>(r) || std::get<Discard>(r).reason != reason) ++wrong_reason;
  };
  std::array<std::uint8_t, kLbHeaderSize> base{};
  encode_lb_header(LbHeader{kDefaultLbVersion, 1, 0, 9, 9}, base);
  for (std::uint32_t m = 0; m <= 0xffff; ++m) {
    if (m == 0x4c42) continue;
    auto b = base;
    b[0] = static_cast<std::uint8_t>(m >> 8);
    b[1] = static_cast<std::uint8_t>(m);
    expect(b, DiscardReason::BadMagic);
  }
  for (unsigned v = 0; v < 256; ++v) {
    if (v == kDefaultLbVersion) continue;
    auto b = base;
    b[2] = static_cast<std::uint8_t>(v);
    expect(b, DiscardReason::BadVersion);
  }
  for (std::size_t len = 0; len < kLbHeaderSize; ++len) expect(std::span(base).first(len), DiscardReason::Truncated);
  return {bad == 0 && wrong_reason == 0,
          std::to_string(round_trips) + " entropy x boundary-event round trips, " + std::to_string(bad) +
              " wrong; " + std::to_string(invalid) + " invalid headers, " + std::to_string(wrong_reason) +
              " with the wrong discard reason"};
}

Verdict live_daemon() {
  using namespace ejfat::testing;
  const auto t0 = Clock::now();
  auto cfg = loopback_config();
  cfg.activation_headroom = 8;
  LiveRig rig(3, cfg);
  auto api = rig.api();
  auto members = [&](std::size_t n) {
    Json ms = Json::array();
    for (std::size_t i = 0; i < n; ++i) ms.push_back(member_spec_to_json(sink_member(static_cast<MemberId>(i), *rig.sinks[i])));
    return Json{{"instance", 0}, {"members", ms}};
  };
  if (api.call("POST", "/v1/epochs", members(2)).status != 200) return {false, "initial epoch rejected"};
  std::vector<emu::DaqSender> daqs;
  for (std::uint16_t d = 0; d < 2; ++d) daqs.push_back(rig.daq(d));
  std::mt19937_64 rng(9);
  std::map<BundleKey, std::uint64_t> sent;
  std::uint64_t boundary = 0;
  for (std::uint64_t ev = 0; ev < 50; ++ev) {
    if (ev == 20) {
      auto r = api.call("PUT", "/v1/members", members(3));
      if (r.status != 200) return {false, "epoch change rejected: " + r.body.dump()};
      boundary = r.body["boundary_event"].get<std::uint64_t>();
    }
    for (std::uint16_t d = 0; d < 2; ++d) {
      auto b = random_bundle(rng, 1000 + rng() % 200'000);
      daqs[d].send_bundle(ev, static_cast<std::uint16_t>(rng()), b);
      sent[BundleKey{d, ev}] = fnv1a(b);
    }
  }
  wait_for([&] { return rig.completed() >= sent.size(); }, std::chrono::seconds(20));
  std::map<std::uint64_t, std::set<std::size_t>> where;
  std::uint64_t delivered = 0, corrupt = 0;
  for (std::size_t s = 0; s < rig.sinks.size(); ++s)
    for (const auto& b : rig.sinks[s]->bundles()) {
      ++delivered;
      where[b.key.event_number].insert(s);
      auto it = sent.find(b.key);
      corrupt += it == sent.end() || it->second != fnv1a(b.data);
    }
  std::uint64_t splits = 0, after_on_new = 0;
  for (const auto& [ev, s] : where) {
    splits += s.size() > 1;
    if (ev >= boundary) after_on_new += s.count(2);
  }
  const double secs = seconds_since(t0);
  const auto c = rig.lb->counters();
  const std::uint64_t lost = sent.size() - std::min<std::uint64_t>(delivered, sent.size());
  const bool pass = delivered == 100 && sent.size() == 100 && splits == 0 && lost == 0 && corrupt == 0 &&
                    c.total_discards() == 0 && after_on_new > 0 && secs < 30.0;
  return {pass, "2 DAQs -> daemon -> 3 CN sinks, epoch change at event " + std::to_string(boundary) + ": " +
                    std::to_string(delivered) + "/100 bundles, splits " + std::to_string(splits) + ", lost " +
                    std::to_string(lost) + ", corrupt " + std::to_string(corrupt) + ", " + fmt(secs) + " s"};
}

Verdict throughput() {
  const auto r = bench_pipeline(2'000'000, 9000);
  return {r.forwarded == r.packets,
          "single worker, 9000-byte packets: " + std::to_string(static_cast<std::uint64_t>(r.packets_per_second())) +
              " packets/s (" + fmt(r.gigabits_per_second(), 1) + " Gb/s equivalent); recorded, no threshold"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"atomic event delivery", atomic_event_delivery},
      {"hit-less reconfiguration", hitless_reconfiguration},
      {"weighted distribution", weighted_distribution},
      {"LPM oracle equivalence", lpm_equivalence},
      {"range_to_prefixes correctness", range_cover},
      {"entropy spreading", entropy_spreading},
      {"segmentation round trip", segmentation_round_trip},
      {"header codec", codec},
      {"live daemon smoke", live_daemon},
      {"throughput smoke", throughput},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s  %2zu  %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
