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

// Command line front end: scenario runs, socket emulators and the pipeline
// benchmark.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

#include "ejfat/bench.hpp"
#include "ejfat/emu/daq.hpp"
#include "ejfat/emu/sink.hpp"
#include "ejfat/sim/run.hpp"

using namespace ejfat;

namespace {

std::atomic<bool> g_stop{false};

Endpoint endpoint_arg(const std::string& text, std::optional<std::uint16_t> default_port) {
  auto ep = io::parse_endpoint(text, default_port);
  if (!ep) throw CLI::ValidationError("address", "cannot parse '" + text + "'");
  return *ep;
}

int scenario_run(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> workers, bool traces) {
  std::ifstream in(config);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open " + config);
  auto cfg = sim::scenario_from_json(Json::parse(in));
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  if (traces) cfg.record_traces = true;
  const auto report = sim::run_scenario(cfg);
  sim::write_report(report, out);
  std::cout << "packets generated " << report.packets_generated << ", delivered " << report.packets_delivered
            << ", junk " << report.junk_packets << ", dropped in network " << report.impairment_dropped << "\n"
            << "bundles " << report.bundles_completed << "/" << report.bundles_total << " complete, split events "
            << report.split_events << ", misdirected " << report.misdirected_packets << ", lost "
            << report.lost_packets << "\n";
  for (const auto& e : report.epochs) {
    std::cout << "  " << (e.label.empty() ? "epoch " + std::to_string(e.epoch) : e.label) << " from event "
              << e.boundary_event << ":";
    for (auto [cn, n] : e.cn_events) std::cout << " CN-" << cn << "=" << n;
    std::cout << "\n";
  }
  std::cout << "conservation " << (report.conservation_ok() ? "ok" : "VIOLATED") << "; report in " << out << "\n";
  return report.split_events == 0 && report.conservation_ok() ? 0 : 1;
}

int daq_run(const std::string& lb, const std::string& bind, std::uint16_t source_id, std::uint64_t first,
            std::uint64_t count, std::size_t min_size, std::size_t max_size, std::size_t mtu, bool sequential,
            std::uint64_t seed, std::size_t burst, std::uint64_t pause_us) {
  emu::DaqConfig c;
  c.balancer = endpoint_arg(lb, kLbServicePort);
  c.local = endpoint_arg(bind, 0);
  c.data_source_id = source_id;
  c.mtu_payload = mtu;
  c.burst = burst;
  c.pause = std::chrono::microseconds(pause_us);
  emu::DaqSender daq(c);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(min_size, max_size);
  std::uint64_t bytes = 0;
  for (std::uint64_t ev = first; ev < first + count && !g_stop; ++ev) {
    std::vector<std::uint8_t> bundle(size(rng));
    for (auto& b : bundle) b = static_cast<std::uint8_t>(rng());
    const auto entropy = sequential ? static_cast<std::uint16_t>(ev) : static_cast<std::uint16_t>(rng());
    daq.send_bundle(ev, entropy, bundle);
    bytes += bundle.size();
  }
  std::cout << "sent " << count << " bundles, " << bytes << " bytes in " << daq.datagrams_sent()
            << " datagrams from " << daq.local().to_string() << "\n";
  return 0;
}

int sink_run(const std::string& bind, std::uint16_t base_port, unsigned bits, std::optional<std::size_t> expect,
             double duration, const std::string& log) {
  auto addr = IpAddress::parse(bind);
  if (!addr) throw CLI::ValidationError("--bind", "bad address");
  emu::CnSink sink(*addr, base_port, static_cast<std::uint8_t>(bits));
  sink.start();
  const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration);
  while (!g_stop && (duration <= 0 || std::chrono::steady_clock::now() < until)) {
    if (expect && sink.completed() >= *expect) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  sink.stop();
  const auto st = sink.stats();
  std::cout << "datagrams " << st.datagrams << ", bundles " << st.completed << ", duplicates " << st.duplicates
            << ", corrupt " << st.corrupt << ", malformed " << st.malformed << "\n";
  if (!log.empty()) {
    std::ofstream out(log);
    out << "data_source_id,event_number,port,from,size,fnv1a\n";
    for (const auto& b : sink.bundles())
      out << b.key.data_source_id << ',' << b.key.event_number << ',' << b.port << ',' << b.from.to_string() << ','
          << b.data.size() << ',' << fnv1a(b.data) << '\n';
  }
  return expect && st.completed < *expect ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EJ-FAT load balancer tools"};
  app.require_subcommand(1);

  auto* scenario = app.add_subcommand("scenario", "Simulated end-to-end runs");
  scenario->require_subcommand(1);
  auto* run = scenario->add_subcommand("run", "Run a scenario file and write report.json and CSV traces");
  std::string config, out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool traces = false;
  run->add_option("--config", config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--workers", workers, "Override the worker count");
  run->add_flag("--traces", traces, "Record per-packet CSV traces");
  auto* example = scenario->add_subcommand("example", "Print the built-in three-epoch scenario");

  auto* daq = app.add_subcommand("daq", "Send segmented bundles to a balancer over UDP");
  std::string lb = "127.0.0.1", daq_bind = "0.0.0.0";
  std::uint16_t source_id = 0;
  std::uint64_t first = 0, count = 100, daq_seed = 1, pause_us = 200;
  std::size_t min_size = 1000, max_size = 100000, mtu = 8000, burst = 32;
  bool sequential = false;
  daq->add_option("--lb", lb, "Balancer address[:port]");
  daq->add_option("--bind", daq_bind, "Local address[:port]");
  daq->add_option("--source-id", source_id, "Data source id in segment headers");
  daq->add_option("--first-event", first);
  daq->add_option("--events", count);
  daq->add_option("--min-size", min_size, "Smallest bundle in bytes");
  daq->add_option("--max-size", max_size, "Largest bundle in bytes");
  daq->add_option("--mtu-payload", mtu, "Segment payload bytes per datagram");
  daq->add_flag("--sequential-entropy", sequential);
  daq->add_option("--seed", daq_seed);
  daq->add_option("--burst", burst, "Datagrams between pauses");
  daq->add_option("--pause-us", pause_us, "Pause length in microseconds");

  auto* sink = app.add_subcommand("sink", "Receive and reassemble bundles as a compute node");
  std::string sink_bind = "127.0.0.1", sink_log;
  std::uint16_t base_port = 17750;
  unsigned bits = 2;
  std::optional<std::size_t> expect;
  double duration = 0;
  sink->add_option("--bind", sink_bind, "Local address");
  sink->add_option("--base-port", base_port);
  sink->add_option("--entropy-bits", bits)->check(CLI::Range(0, 16));
  sink->add_option("--expect", expect, "Exit after this many bundles");
  sink->add_option("--duration", duration, "Exit after this many seconds (0 = until signalled)");
  sink->add_option("--log", sink_log, "CSV of received bundles");

  auto* bench = app.add_subcommand("bench", "Single-thread pipeline throughput");
  std::uint64_t packets = 5'000'000;
  std::size_t size = 9000;
  bench->add_option("--packets", packets);
  bench->add_option("--size", size, "UDP payload bytes");

  CLI11_PARSE(app, argc, argv);
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });

  try {
    if (*run) return scenario_run(config, out, seed, workers, traces);
    if (*example) {
      std::cout << sim::scenario_to_json(sim::figure6_scenario()).dump(2) << "\n";
      return 0;
    }
    if (*daq)
      return daq_run(lb, daq_bind, source_id, first, count, min_size, max_size, mtu, sequential, daq_seed, burst,
                     pause_us);
    if (*sink) return sink_run(sink_bind, base_port, bits, expect, duration, sink_log);
    if (*bench) {
      const auto r = bench_pipeline(packets, size);
      std::cout << r.packets << " packets of " << r.packet_size << " bytes in " << r.seconds << " s: "
                << static_cast<std::uint64_t>(r.packets_per_second()) << " packets/s ("
                << r.gigabits_per_second() << " Gb/s equivalent)\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
