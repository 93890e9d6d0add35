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

// The load balancer daemon.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "ejfat/daemon/server.hpp"

using namespace ejfat;

int main(int argc, char** argv) {
  CLI::App app{"EJ-FAT event-aware UDP load balancer"};
  std::string config_path, listen, control_listen, log_level;
  app.add_option("--config", config_path, "Daemon configuration JSON")->envname("EJFAT_LBD_CONFIG");
  app.add_option("--listen", listen, "Service sockets: address[:port][=instance], comma separated")
      ->envname("EJFAT_LBD_LISTEN");
  app.add_option("--control-listen", control_listen, "Control API address:port")->envname("EJFAT_LBD_CONTROL_LISTEN");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->envname("EJFAT_LBD_LOG_LEVEL");
  CLI11_PARSE(app, argc, argv);

  // Signals are taken synchronously below; block them before any thread
  // starts so that every thread inherits the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    daemon::DaemonConfig cfg = config_path.empty() ? daemon::DaemonConfig{} : daemon::load_config(config_path);
    if (!listen.empty()) cfg.listen = daemon::parse_listen_list(listen);
    if (!control_listen.empty()) {
      auto ep = io::parse_endpoint(control_listen, std::nullopt);
      if (!ep) throw Error(ErrorCode::ConfigInvalid, "bad --control-listen '" + control_listen + "'");
      cfg.control_listen = *ep;
    }
    if (!log_level.empty()) cfg.log_level = log_level;

    daemon::Daemon lbd(std::move(cfg));
    lbd.start();
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}, shutting down", sig);
    lbd.stop();
  } catch (const Error& e) {
    std::cerr << "ejfat-lbd: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
