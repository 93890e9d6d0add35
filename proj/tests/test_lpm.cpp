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

#include "ejfat/lpm.hpp"
#include "ejfat/prefix_range.hpp"
#include "oracles.hpp"

using namespace ejfat;

TEST(Lpm, WildcardMatchesEverything) {
  LpmTrie<std::uint64_t, int> t;
  t.insert({0, 0}, 7);
  for (std::uint64_t k : {0ull, 1ull, 511ull, 1ull << 40, ~0ull}) EXPECT_EQ(*t.lookup(k), 7);
}

TEST(Lpm, EmptyTableHasNoMatch) {
  LpmTrie<std::uint64_t, int> t;
  EXPECT_EQ(t.lookup(42), nullptr);
}

TEST(Lpm, EpochBoundaryExample) {
  // /0 -> E1, [1920, 1984) -> E2 ([1920,1984) is the aligned /58 at 0x780).
  LpmTrie<std::uint64_t, int> t;
  t.insert({0, 0}, 1);
  for (auto p : range_to_prefixes<std::uint64_t>(1920, 1984)) t.insert(p, 2);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(*t.lookup(1900), 1);
  EXPECT_EQ(*t.lookup(1930), 2);
  EXPECT_EQ(*t.lookup(1984), 1);
}

TEST(Lpm, FullLengthPrefix) {
  LpmTrie<std::uint16_t, int> t;
  t.insert({0, 0}, 0);
  t.insert({0xFFFF, 16}, 1);
  EXPECT_EQ(*t.lookup(0xFFFF), 1);
  EXPECT_EQ(*t.lookup(0xFFFE), 0);
}

TEST(Lpm, RejectsMalformedPrefix) {
  LpmTrie<std::uint16_t, int> t;
  EXPECT_THROW(t.insert({0x0001, 8}, 1), std::invalid_argument);
  EXPECT_THROW(t.insert({0, 17}, 1), std::invalid_argument);
}

TEST(Lpm, EraseAndEntries) {
  LpmTrie<std::uint16_t, int> t;
  t.insert({0, 0}, 0);
  t.insert({0x8000, 1}, 1);
  t.insert({0xC000, 2}, 2);
  EXPECT_EQ(t.entries().size(), 3u);
  EXPECT_TRUE(t.erase({0x8000, 1}));
  EXPECT_FALSE(t.erase({0x8000, 1}));
  EXPECT_EQ(*t.lookup(0x8001), 0);
  EXPECT_EQ(*t.lookup(0xC001), 2);
  EXPECT_EQ(t.erase_if([](int v) { return v == 2; }), 1u);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(*t.lookup(0xC001), 0);
}

TEST(Lpm, AgreesWithLinearScanOnRandomTables) {
  // 10^5 random (table, key) pairs over 64-bit keys.
  std::mt19937_64 rng(11);
  for (int table = 0; table < 1000; ++table) {
    LpmTrie<std::uint64_t, int> trie;
    std::vector<std::pair<oracle::ToyPrefix, int>> linear;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      const unsigned len = static_cast<unsigned>(rng() % 65);
      const std::uint64_t v = len == 0 ? 0 : (rng() & Prefix<std::uint64_t>::mask(len));
      trie.insert({v, len}, i);
      std::erase_if(linear, [&](const auto& e) { return e.first.value == v && e.first.length == len; });
      linear.push_back({{v, len}, i});
    }
    for (int k = 0; k < 100; ++k) {
      // Bias keys toward inserted prefixes so deep matches get exercised.
      std::uint64_t key = rng();
      if (k % 2 == 0) {
        const auto& p = linear[rng() % linear.size()].first;
        key = p.value | (rng() & ~Prefix<std::uint64_t>::mask(p.length));
      }
      const int* got = trie.lookup(key);
      auto want = oracle::linear_lpm(linear, key, 64);
      ASSERT_EQ(got != nullptr, want.has_value());
      if (got) {
        ASSERT_EQ(*got, *want);
      }
    }
  }
}
