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

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <utility>

namespace ejfat {

/// Publishes immutable snapshots to many readers. A writer swaps in a whole
/// new object; readers keep a cached pointer and only touch the lock when the
/// generation number has moved, so steady-state reads are one atomic load.
template <typename T>
class SnapshotHolder {
 public:
  explicit SnapshotHolder(std::shared_ptr<const T> initial = std::make_shared<const T>())
      : current_(std::move(initial)) {}

  void publish(std::shared_ptr<const T> next) {
    {
      std::lock_guard lock(mutex_);
      current_ = std::move(next);
    }
    generation_.fetch_add(1, std::memory_order_release);
  }

  void publish(T next) { publish(std::make_shared<const T>(std::move(next))); }

  std::shared_ptr<const T> get() const {
    std::lock_guard lock(mutex_);
    return current_;
  }

  std::uint64_t generation() const noexcept { return generation_.load(std::memory_order_acquire); }

  /// Per-thread cached handle.
  class Reader {
   public:
    explicit Reader(const SnapshotHolder& holder) : holder_(&holder) { refresh(); }

    /// Snapshot current as of this call; stable until the next call.
    const T& current() {
      if (holder_->generation() != seen_) refresh();
      return *cached_;
    }

    std::shared_ptr<const T> pin() {
      current();
      return cached_;
    }

   private:
    void refresh() {
      seen_ = holder_->generation();
      cached_ = holder_->get();
    }

    const SnapshotHolder* holder_;
    std::uint64_t seen_ = 0;
    std::shared_ptr<const T> cached_;
  };

  Reader reader() const { return Reader(*this); }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const T> current_;
  std::atomic<std::uint64_t> generation_{0};
};

}  // namespace ejfat
