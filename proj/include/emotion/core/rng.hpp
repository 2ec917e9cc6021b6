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

#ifndef EMOTION_CORE_RNG_HPP_
#define EMOTION_CORE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace emotion {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based random source. Every draw is a pure function of
// (seed, stream, index), so results are identical across platforms and
// independent of the order in which streams are consumed. The cursor methods
// advance an internal counter for convenience.
class RandomSource {
 public:
  RandomSource() = default;
  RandomSource(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  // A new source over a derived stream; deterministic in (this stream, id).
  RandomSource fork(std::uint64_t id) const noexcept {
    return RandomSource(seed_, mix64(stream_ ^ mix64(id + 0x5851F42D4C957F2Dull)));
  }

  std::uint64_t bits_at(std::uint64_t index) const noexcept {
    return mix64(mix64(seed_ ^ 0xD1B54A32D192ED03ull) ^
                 mix64(stream_ + 0x8CB92BA72F3D8DD7ull) ^ index * 0x9E3779B97F4A7C15ull);
  }

  // Uniform on the open interval (0, 1).
  double uniform_at(std::uint64_t index) const noexcept {
    return (static_cast<double>(bits_at(index) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller on draws 2i and 2i+1.
  double normal_at(std::uint64_t index) const noexcept {
    const double u1 = uniform_at(2 * index);
    const double u2 = uniform_at(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next_bits() noexcept { return bits_at(counter_++); }
  double uniform() noexcept { return uniform_at(counter_++); }
  double normal() noexcept { return normal_at(counter_++); }

  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace emotion

#endif  // EMOTION_CORE_RNG_HPP_
