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

#include <gtest/gtest.h>

#include <random>

#include "ejfat/prefix_range.hpp"
#include "oracles.hpp"

using namespace ejfat;

namespace {

std::vector<oracle::ToyPrefix> toy(const std::vector<Prefix<std::uint16_t>>& ps) {
  std::vector<oracle::ToyPrefix> out;
  for (auto p : ps) out.push_back({p.value, p.length});
  return out;
}

void expect_exact_cover(std::uint32_t begin, std::uint32_t end) {
  std::optional<std::uint16_t> e;
  if (end < 65536) e = static_cast<std::uint16_t>(end);
  auto ps = range_to_prefixes<std::uint16_t>(static_cast<std::uint16_t>(begin), e);
  for (auto p : ps) ASSERT_TRUE(p.well_formed());
  auto hits = oracle::coverage(toy(ps), 16);
  for (std::uint32_t k = 0; k < 65536; ++k) ASSERT_EQ(hits[k], (k >= begin && k < end) ? 1 : 0) << k;
  ASSERT_LE(ps.size(), 2u * 16 - 2);
}

}  // namespace

TEST(RangeToPrefixes, WholeSpaceIsOnePrefix) {
  auto ps = range_to_prefixes<std::uint64_t>(0, std::nullopt);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0], (Prefix<std::uint64_t>{0, 0}));
}

TEST(RangeToPrefixes, AlignedPowerOfTwo) {
  for (unsigned k = 1; k < 64; ++k) {
    auto ps = range_to_prefixes<std::uint64_t>(0, std::uint64_t{1} << k);
    ASSERT_EQ(ps.size(), 1u);
    EXPECT_EQ(ps[0], (Prefix<std::uint64_t>{0, 64 - k}));
  }
}

TEST(RangeToPrefixes, EpochExampleRange) {
  // [1900, 1930): 1900..1903 /62, 1904..1919 /60, 1920..1927 /61, 1928..1929 /63.
  auto ps = range_to_prefixes<std::uint64_t>(1900, 1930);
  std::vector<Prefix<std::uint64_t>> expect = {{1900, 62}, {1904, 60}, {1920, 61}, {1928, 63}};
  EXPECT_EQ(ps, expect);
  expect_exact_cover(1900, 1930);
}

TEST(RangeToPrefixes, EmptyRangeRejected) {
  try {
    range_to_prefixes<std::uint64_t>(5, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRange);
  }
  EXPECT_THROW(range_to_prefixes<std::uint64_t>(6, 5), Error);
}

TEST(RangeToPrefixes, TopOfSpace) {
  auto ps = range_to_prefixes<std::uint64_t>(~0ull, std::nullopt);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0], (Prefix<std::uint64_t>{~0ull, 64}));
  auto worst = range_to_prefixes<std::uint64_t>(1, ~0ull);
  EXPECT_EQ(worst.size(), 2u * 64 - 2);
}

TEST(RangeToPrefixes, ExactCoverRandom16Bit) {
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::uint32_t a = rng() % 65537, b = rng() % 65537;
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    expect_exact_cover(a, b);
  }
  expect_exact_cover(0, 65536);
  expect_exact_cover(65535, 65536);
}
