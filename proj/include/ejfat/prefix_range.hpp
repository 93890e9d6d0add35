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

#include <bit>
#include <optional>
#include <string>
#include <vector>

#include "ejfat/error.hpp"
#include "ejfat/lpm.hpp"

namespace ejfat {

/// Decomposes the inclusive key range [first, last] into the minimal set of
/// disjoint aligned prefixes, in ascending key order.
template <std::unsigned_integral Key>
std::vector<Prefix<Key>> range_to_prefixes_inclusive(Key first, Key last) {
  if (first > last) throw Error(ErrorCode::EmptyRange, "first > last");
  constexpr unsigned width = kKeyBits<Key>;
  std::vector<Prefix<Key>> out;
  Key cur = first;
  for (;;) {
    unsigned k = cur == 0 ? width : static_cast<unsigned>(std::countr_zero(cur));
    const Key span = static_cast<Key>(last - cur);
    // Largest aligned block starting at cur that stays within [cur, last].
    while (k > 0) {
      const Key block_minus_one = k == width ? static_cast<Key>(~Key{0})
                                             : static_cast<Key>((Key{1} << k) - 1);
      if (block_minus_one <= span) break;
      --k;
    }
    out.push_back(Prefix<Key>{cur, width - k});
    const Key block_last = k == width ? static_cast<Key>(~Key{0})
                                      : static_cast<Key>(cur + ((Key{1} << k) - 1));
    if (block_last == last) break;
    cur = static_cast<Key>(block_last + 1);
  }
  return out;
}

/// Prefixes covering [begin, end). An empty `end` means the range runs to the
/// top of the key space (2^width).
template <std::unsigned_integral Key>
std::vector<Prefix<Key>> range_to_prefixes(Key begin, std::optional<Key> end) {
  if (end) {
    if (begin >= *end)
      throw Error(ErrorCode::EmptyRange,
                  "[" + std::to_string(begin) + ", " + std::to_string(*end) + ")");
    return range_to_prefixes_inclusive<Key>(begin, static_cast<Key>(*end - 1));
  }
  return range_to_prefixes_inclusive<Key>(begin, static_cast<Key>(~Key{0}));
}

}  // namespace ejfat
