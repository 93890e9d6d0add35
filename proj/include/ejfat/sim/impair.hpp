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
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ejfat/error.hpp"

namespace ejfat::sim {

enum class DelayModel : std::uint8_t { None, Uniform, Exponential };

constexpr std::string_view to_string(DelayModel d) noexcept {
  switch (d) {
    case DelayModel::None: return "none";
    case DelayModel::Uniform: return "uniform";
    case DelayModel::Exponential: return "exponential";
  }
  return "none";
}

inline DelayModel delay_model_from(std::string_view s) {
  if (s == "none") return DelayModel::None;
  if (s == "uniform") return DelayModel::Uniform;
  if (s == "exponential") return DelayModel::Exponential;
  throw Error(ErrorCode::ConfigInvalid, "unknown delay model '" + std::string(s) + "'");
}

/// Network impairment between the DAQs and the balancer, in units of packet
/// positions. Each packet is delayed by a sample from the delay model,
/// clipped below `reorder_window`, so no packet moves more than
/// `reorder_window` positions.
struct ImpairmentConfig {
  DelayModel delay = DelayModel::Uniform;
  double mean_delay = 0.0;  // exponential model only; packets
  std::size_t reorder_window = 0;
  double loss_rate = 0.0;
};

struct ImpairedOrder {
  std::vector<std::size_t> order;  // indices of surviving packets, arrival order
  std::vector<std::size_t> dropped;
};

/// Arrival order for a stream of `n` packets.
inline ImpairedOrder impair_order(std::size_t n, const ImpairmentConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ImpairedOrder out;
  std::vector<double> key(n);
  const double w = static_cast<double>(cfg.reorder_window);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> expo(cfg.mean_delay > 0 ? 1.0 / cfg.mean_delay : 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double delay = 0.0;
    if (cfg.reorder_window > 0) {
      switch (cfg.delay) {
        case DelayModel::None: break;
        case DelayModel::Uniform: delay = uni(rng) * w; break;
        case DelayModel::Exponential: delay = std::min(expo(rng), std::nextafter(w, 0.0)); break;
      }
    }
    key[i] = static_cast<double>(i) + delay;
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  std::bernoulli_distribution lose(std::clamp(cfg.loss_rate, 0.0, 1.0));
  out.order.reserve(n);
  for (std::size_t i : idx) {
    if (cfg.loss_rate > 0 && lose(rng))
      out.dropped.push_back(i);
    else
      out.order.push_back(i);
  }
  return out;
}

/// Content-preserving reordering (and optional loss) of a packet stream.
template <typename T>
std::vector<T> impair(std::vector<T> stream, const ImpairmentConfig& cfg, std::uint64_t seed) {
  const auto plan = impair_order(stream.size(), cfg, seed);
  std::vector<T> out;
  out.reserve(plan.order.size());
  for (std::size_t i : plan.order) out.push_back(std::move(stream[i]));
  return out;
}

}  // namespace ejfat::sim
