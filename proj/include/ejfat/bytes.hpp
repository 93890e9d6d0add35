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

#include <cstddef>
#include <cstdint>
#include <span>

namespace ejfat::detail {

// Big-endian (network order) field access over raw octets.

template <typename T>
constexpr T load_be(std::span<const std::uint8_t> in, std::size_t offset) noexcept {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v = static_cast<T>((v << 8) | in[offset + i]);
  return v;
}

template <typename T>
constexpr void store_be(std::span<std::uint8_t> out, std::size_t offset, T v) noexcept {
  for (std::size_t i = sizeof(T); i-- > 0;) {
    out[offset + i] = static_cast<std::uint8_t>(v & 0xff);
    if constexpr (sizeof(T) > 1) v = static_cast<T>(v >> 8);
  }
}

}  // namespace ejfat::detail

namespace ejfat {

/// 64-bit FNV-1a; used to compare bundles without keeping copies.
constexpr std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace ejfat
