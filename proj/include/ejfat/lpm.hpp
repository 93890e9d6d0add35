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

#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ejfat {

template <std::unsigned_integral Key>
inline constexpr unsigned kKeyBits = std::numeric_limits<Key>::digits;

/// A prefix over an unsigned key: the top `length` bits of `value` are
/// significant, the rest must be zero.
template <std::unsigned_integral Key>
struct Prefix {
  Key value = 0;
  unsigned length = 0;

  /// Mask of the significant (high) bits.
  static constexpr Key mask(unsigned length) noexcept {
    if (length == 0) return 0;
    return static_cast<Key>(~Key{0} << (kKeyBits<Key> - length));
  }

  constexpr bool well_formed() const noexcept {
    return length <= kKeyBits<Key> && (value & ~mask(length)) == 0;
  }

  constexpr bool contains(Key key) const noexcept { return (key & mask(length)) == value; }

  /// First and last key covered.
  constexpr Key first() const noexcept { return value; }
  constexpr Key last() const noexcept { return static_cast<Key>(value | ~mask(length)); }

  friend constexpr auto operator<=>(const Prefix&, const Prefix&) = default;
};

/// Binary trie giving longest-prefix match over the full key width. Lookup is
/// at most kKeyBits node visits. Value type is copied into the result.
template <std::unsigned_integral Key, typename Value>
class LpmTrie {
 public:
  using prefix_type = Prefix<Key>;
  using entry_type = std::pair<prefix_type, Value>;

  LpmTrie() { nodes_.emplace_back(); }

  /// Inserts or replaces the value stored at `p`.
  void insert(prefix_type p, Value v) {
    if (!p.well_formed()) throw std::invalid_argument("LpmTrie::insert: malformed prefix");
    std::uint32_t n = 0;
    for (unsigned depth = 0; depth < p.length; ++depth) {
      unsigned bit = bit_at(p.value, depth);
      if (nodes_[n].child[bit] == kNil) {
        nodes_[n].child[bit] = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
      }
      n = nodes_[n].child[bit];
    }
    if (!nodes_[n].value) ++size_;
    nodes_[n].value = std::move(v);
  }

  /// Removes the entry at exactly `p`. Returns false if absent.
  bool erase(prefix_type p) {
    std::uint32_t n = find_node(p);
    if (n == kNil || !nodes_[n].value) return false;
    nodes_[n].value.reset();
    --size_;
    compact();
    return true;
  }

  const Value* find(prefix_type p) const {
    std::uint32_t n = find_node(p);
    if (n == kNil || !nodes_[n].value) return nullptr;
    return &*nodes_[n].value;
  }

  /// Longest-prefix match; nullptr when no prefix covers `key`.
  const Value* lookup(Key key) const noexcept {
    const Value* best = nullptr;
    std::uint32_t n = 0;
    for (unsigned depth = 0;; ++depth) {
      const Node& node = nodes_[n];
      if (node.value) best = &*node.value;
      if (depth == kKeyBits<Key>) break;
      std::uint32_t next = node.child[bit_at(key, depth)];
      if (next == kNil) break;
      n = next;
    }
    return best;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  /// All entries in trie pre-order (by value, then shorter prefix first).
  std::vector<entry_type> entries() const {
    std::vector<entry_type> out;
    out.reserve(size_);
    collect(0, Key{0}, 0, out);
    return out;
  }

  template <typename Pred>
  std::size_t erase_if(Pred pred) {
    std::size_t removed = 0;
    for (auto& node : nodes_) {
      if (node.value && pred(*node.value)) {
        node.value.reset();
        ++removed;
      }
    }
    size_ -= removed;
    if (removed) compact();
    return removed;
  }

  friend bool operator==(const LpmTrie& a, const LpmTrie& b) { return a.entries() == b.entries(); }

 private:
  static constexpr std::uint32_t kNil = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    std::uint32_t child[2] = {kNil, kNil};
    std::optional<Value> value;
  };

  static constexpr unsigned bit_at(Key key, unsigned depth) noexcept {
    return static_cast<unsigned>((key >> (kKeyBits<Key> - 1 - depth)) & 1u);
  }

  std::uint32_t find_node(prefix_type p) const {
    if (!p.well_formed()) return kNil;
    std::uint32_t n = 0;
    for (unsigned depth = 0; depth < p.length && n != kNil; ++depth)
      n = nodes_[n].child[bit_at(p.value, depth)];
    return n;
  }

  void collect(std::uint32_t n, Key value, unsigned depth, std::vector<entry_type>& out) const {
    const Node& node = nodes_[n];
    if (node.value) out.emplace_back(prefix_type{value, depth}, *node.value);
    if (depth == kKeyBits<Key>) return;
    for (unsigned bit = 0; bit < 2; ++bit) {
      if (node.child[bit] == kNil) continue;
      Key next = value | static_cast<Key>(static_cast<Key>(bit) << (kKeyBits<Key> - 1 - depth));
      collect(node.child[bit], next, depth + 1, out);
    }
  }

  // Rebuilds the node pool without dead branches.
  void compact() {
    auto live = entries();
    nodes_.clear();
    nodes_.emplace_back();
    size_ = 0;
    for (auto& [p, v] : live) insert(p, std::move(v));
  }

  std::vector<Node> nodes_;
  std::size_t size_ = 0;
};

}  // namespace ejfat
