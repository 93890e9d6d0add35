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

// Reference implementations used only by tests. They are deliberately naive
// and share no code with the library paths they check.

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace ejfat::oracle {

/// A prefix as (value, length) over a `width`-bit key.
struct ToyPrefix {
  std::uint64_t value;
  unsigned length;
};

inline bool toy_contains(const ToyPrefix& p, std::uint64_t key, unsigned width) {
  if (p.length == 0) return true;
  const unsigned shift = width - p.length;
  return (key >> shift) == (p.value >> shift);
}

/// Scan every entry and keep the longest one that covers the key.
template <typename V>
std::optional<V> linear_lpm(const std::vector<std::pair<ToyPrefix, V>>& table, std::uint64_t key,
                            unsigned width) {
  std::optional<V> best;
  int best_len = -1;
  for (const auto& [p, v] : table) {
    if (toy_contains(p, key, width) && static_cast<int>(p.length) > best_len) {
      best_len = static_cast<int>(p.length);
      best = v;
    }
  }
  return best;
}

/// Membership bitmap over a `width`-bit space for a set of prefixes; each
/// position counts how many prefixes cover it.
inline std::vector<std::uint8_t> coverage(const std::vector<ToyPrefix>& prefixes, unsigned width) {
  std::vector<std::uint8_t> hits(std::size_t{1} << width, 0);
  for (const auto& p : prefixes) {
    const std::uint64_t size = std::uint64_t{1} << (width - p.length);
    for (std::uint64_t k = p.value; k < p.value + size; ++k) ++hits[k];
  }
  return hits;
}

/// Largest-remainder apportionment with integer weights, carried out in
/// exact integer arithmetic: quota_i = total * w_i / W as numerator/W.
inline std::vector<std::size_t> hamilton(const std::vector<std::uint64_t>& weights, std::size_t total) {
  const std::uint64_t sum = std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
  std::vector<std::size_t> seats(weights.size());
  std::vector<std::pair<std::uint64_t, std::size_t>> rema;  // (remainder numerator, index)
  std::size_t given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const std::uint64_t num = total * weights[i];
    seats[i] = num / sum;
    given += seats[i];
    rema.push_back({num % sum, i});
  }
  std::stable_sort(rema.begin(), rema.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t k = 0; given < total; ++k, ++given) ++seats[rema[k].second];
  return seats;
}

}  // namespace ejfat::oracle
