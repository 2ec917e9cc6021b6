// Copyright 2026 The E-Motion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMOTION_ALIGNMENT_POOL_HPP_
#define EMOTION_ALIGNMENT_POOL_HPP_

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "emotion/alignment/trajectory.hpp"
#include "emotion/core/error.hpp"

namespace emotion {

// Bounded buffer of trajectories generated under one reference policy.
// Each generation has a stamp; producers claim (stamp, index) slots, and a
// trajectory whose stamp no longer matches is discarded on submit. The
// consumer waits until every slot of the current generation is filled.
template <typename Reference>
class TrajectoryPool {
 public:
  struct Job {
    std::uint64_t stamp;
    std::uint64_t index;
    std::shared_ptr<const Reference> reference;
  };

  explicit TrajectoryPool(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ParameterError("pool capacity must be positive");
  }

  std::size_t capacity() const noexcept { return capacity_; }

  std::uint64_t stamp() const {
    std::lock_guard lock(mutex_);
    return stamp_;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

  std::size_t discarded() const {
    std::lock_guard lock(mutex_);
    return discarded_;
  }

  // Starts a new generation: drops everything held and reopens all slots.
  void advance(std::uint64_t stamp, std::shared_ptr<const Reference> reference) {
    {
      std::lock_guard lock(mutex_);
      stamp_ = stamp;
      reference_ = std::move(reference);
      discarded_ += items_.size();
      items_.clear();
      claimed_ = 0;
    }
    slots_.notify_all();
  }

  // Blocks until a slot is free or the pool closes (then returns nullopt).
  std::optional<Job> claim() {
    std::unique_lock lock(mutex_);
    slots_.wait(lock, [&] { return closed_ || (reference_ && claimed_ < capacity_); });
    if (closed_) return std::nullopt;
    return Job{stamp_, claimed_++, reference_};
  }

  // Non-blocking claim used by the single-threaded path.
  std::optional<Job> try_claim() {
    std::lock_guard lock(mutex_);
    if (closed_ || !reference_ || claimed_ >= capacity_) return std::nullopt;
    return Job{stamp_, claimed_++, reference_};
  }

  // Returns false when the trajectory is stale and was dropped.
  bool submit(Trajectory t) {
    {
      std::lock_guard lock(mutex_);
      if (t.stamp != stamp_ || closed_) {
        ++discarded_;
        return false;
      }
      items_.push_back(std::move(t));
    }
    filled_.notify_all();
    return true;
  }

  void fail(std::exception_ptr e) {
    {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = e;
    }
    filled_.notify_all();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    slots_.notify_all();
    filled_.notify_all();
  }

  // Takes the full current generation, ordered by index.
  std::vector<Trajectory> take_full(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    const bool ready = filled_.wait_for(lock, timeout, [&] {
      return error_ != nullptr || items_.size() >= capacity_;
    });
    if (error_) std::rethrow_exception(error_);
    if (!ready) {
      throw TimeoutError("trajectory pool holds " + std::to_string(items_.size()) + " of " +
                         std::to_string(capacity_) + " after " + std::to_string(timeout.count()) +
                         " ms");
    }
    std::vector<Trajectory> out = std::move(items_);
    items_.clear();
    std::sort(out.begin(), out.end(),
              [](const Trajectory& a, const Trajectory& b) { return a.index < b.index; });
    return out;
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable slots_;
  std::condition_variable filled_;
  std::uint64_t stamp_ = 0;
  std::shared_ptr<const Reference> reference_;
  std::vector<Trajectory> items_;
  std::uint64_t claimed_ = 0;
  std::size_t discarded_ = 0;
  bool closed_ = false;
  std::exception_ptr error_;
};

}  // namespace emotion

#endif  // EMOTION_ALIGNMENT_POOL_HPP_
