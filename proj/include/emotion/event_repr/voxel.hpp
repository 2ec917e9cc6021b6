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

#ifndef EMOTION_EVENT_REPR_VOXEL_HPP_
#define EMOTION_EVENT_REPR_VOXEL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/event_sim/events.hpp"

namespace emotion {

// Number of temporal bins per voxel frame; three so that a frame maps onto
// an image-like three-channel tensor.
inline constexpr int kDefaultBins = 3;
inline constexpr std::uint32_t kDefaultIntervalUs = 20000;

struct VoxelFrame {
  int bins = kDefaultBins;
  int height = 0;
  int width = 0;
  std::int64_t t0 = 0;  // window [t0, t1) in us
  std::int64_t t1 = 0;
  std::vector<double> values;  // bin-major, then row-major

  double& at(int b, int y, int x) {
    return values[(static_cast<std::size_t>(b) * height + y) * width + x];
  }
  double at(int b, int y, int x) const {
    return values[(static_cast<std::size_t>(b) * height + y) * width + x];
  }
};

// Frames with contiguous, equal-length windows starting at t0. Values are
// frame-major, bin-major, row-major.
struct VoxelSequence {
  int frames = 0;
  int bins = kDefaultBins;
  int height = 0;
  int width = 0;
  std::int64_t t0 = 0;
  std::uint32_t window_us = kDefaultIntervalUs;
  std::optional<double> scale;  // set by normalize_sequence
  std::vector<double> values;

  VoxelSequence() = default;
  VoxelSequence(int f, int b, int h, int w)
      : frames(f), bins(b), height(h), width(w),
        values(static_cast<std::size_t>(f) * b * h * w, 0.0) {}

  std::size_t frame_size() const noexcept {
    return static_cast<std::size_t>(bins) * height * width;
  }
  std::size_t size() const noexcept { return values.size(); }

  std::span<double> frame(int f) {
    return std::span<double>(values).subspan(f * frame_size(), frame_size());
  }
  std::span<const double> frame(int f) const {
    return std::span<const double>(values).subspan(f * frame_size(), frame_size());
  }
  double& at(int f, int b, int y, int x) {
    return values[((static_cast<std::size_t>(f) * bins + b) * height + y) * width + x];
  }
  double at(int f, int b, int y, int x) const {
    return values[((static_cast<std::size_t>(f) * bins + b) * height + y) * width + x];
  }

  bool same_shape(const VoxelSequence& o) const noexcept {
    return frames == o.frames && bins == o.bins && height == o.height && width == o.width;
  }
  bool same_frame_shape(const VoxelSequence& o) const noexcept {
    return bins == o.bins && height == o.height && width == o.width;
  }

  // Frames [first, first + count) as a new sequence (scale is kept).
  VoxelSequence slice(int first, int count) const {
    if (first < 0 || count < 0 || first + count > frames) throw RangeError("frame slice out of range");
    VoxelSequence out(count, bins, height, width);
    out.t0 = t0 + static_cast<std::int64_t>(first) * window_us;
    out.window_us = window_us;
    out.scale = scale;
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(first * frame_size()),
                count * frame_size(), out.values.begin());
    return out;
  }
};

inline std::string shape_string(const VoxelSequence& s) {
  return std::to_string(s.frames) + "x" + std::to_string(s.bins) + "x" +
         std::to_string(s.height) + "x" + std::to_string(s.width);
}

inline void require_same_shape(const VoxelSequence& a, const VoxelSequence& b,
                               const char* what) {
  if (!a.same_shape(b)) {
    throw DataError(std::string(what) + ": shape " + shape_string(a) + " vs " + shape_string(b));
  }
}

// Linear temporal kernel. Bin centres sit at t0 + (b + 0.5) (t1 - t0) / B;
// timestamps before the first or after the last centre clamp to that bin.
// The interpolation fraction is rounded to a multiple of 2^-24 so that the
// two weights are exact binary fractions summing to exactly one; sums of
// many deposits are then exact in double precision.
struct BinWeights {
  int lower = 0;
  double w_lower = 1.0;
  double w_upper = 0.0;  // deposited into lower + 1 when nonzero
};

inline BinWeights temporal_kernel(std::int64_t t, std::int64_t t0, std::int64_t t1, int bins) {
  const double u = (static_cast<double>(t - t0) / static_cast<double>(t1 - t0)) * bins - 0.5;
  if (u <= 0.0) return {0, 1.0, 0.0};
  if (u >= bins - 1) return {bins - 1, 1.0, 0.0};
  const int lower = static_cast<int>(std::floor(u));
  const double frac = std::ldexp(std::round(std::ldexp(u - lower, 24)), -24);
  if (frac >= 1.0) return {lower + 1, 1.0, 0.0};
  return {lower, 1.0 - frac, frac};
}

// Deposits events with t in [t0, t1) into a B x H x W grid; events outside
// the window are ignored.
inline VoxelFrame voxelize(std::span<const Event> events, std::int64_t t0, std::int64_t t1,
                           int bins, int height, int width) {
  if (!(t1 > t0)) throw RangeError("voxel window must satisfy t0 < t1");
  if (bins < 1) throw ParameterError("bin count must be at least 1");
  if (height <= 0 || width <= 0) throw ParameterError("voxel grid must be nonempty");
  VoxelFrame frame{bins, height, width, t0, t1,
                   std::vector<double>(static_cast<std::size_t>(bins) * height * width, 0.0)};
  for (const Event& e : events) {
    if (e.t < t0 || e.t >= t1) continue;
    if (e.x >= width || e.y >= height) {
      throw DataError("event at (" + std::to_string(e.x) + ", " + std::to_string(e.y) +
                      ") outside " + std::to_string(width) + "x" + std::to_string(height));
    }
    const BinWeights k = temporal_kernel(e.t, t0, t1, bins);
    const double p = e.p;
    frame.at(k.lower, e.y, e.x) += p * k.w_lower;
    if (k.w_upper != 0.0) frame.at(k.lower + 1, e.y, e.x) += p * k.w_upper;
  }
  return frame;
}

// Sorted-stream overload: restricts the scan to the window by binary search.
inline VoxelFrame voxelize(const EventStream& stream, std::int64_t t0, std::int64_t t1,
                           int bins = kDefaultBins) {
  if (!(t1 > t0)) throw RangeError("voxel window must satisfy t0 < t1");
  const auto lo = std::lower_bound(stream.events.begin(), stream.events.end(), t0,
                                   [](const Event& e, std::int64_t t) { return e.t < t; });
  const auto hi = std::lower_bound(lo, stream.events.end(), t1,
                                   [](const Event& e, std::int64_t t) { return e.t < t; });
  return voxelize(std::span<const Event>(lo, hi), t0, t1, bins,
                  stream.height, stream.width);
}

// `count` consecutive windows of `interval_us` starting at `start_us`.
inline VoxelSequence windowize(const EventStream& stream, std::int64_t interval_us,
                               std::int64_t start_us, int count, int bins = kDefaultBins) {
  if (interval_us <= 0) throw ParameterError("window interval must be positive");
  if (count < 0) throw ParameterError("window count must be non-negative");
  VoxelSequence seq(count, bins, stream.height, stream.width);
  seq.t0 = start_us;
  seq.window_us = static_cast<std::uint32_t>(interval_us);
  for (int f = 0; f < count; ++f) {
    const std::int64_t a = start_us + f * interval_us;
    const VoxelFrame frame = voxelize(stream, a, a + interval_us, bins);
    std::copy(frame.values.begin(), frame.values.end(), seq.frame(f).begin());
  }
  return seq;
}

// Windows tiling the whole stream from t = 0; a trailing partial window is
// dropped.
inline VoxelSequence windowize(const EventStream& stream,
                               std::int64_t interval_us = kDefaultIntervalUs,
                               int bins = kDefaultBins) {
  if (interval_us <= 0) throw ParameterError("window interval must be positive");
  const auto count = static_cast<int>(stream.duration_us / interval_us);
  return windowize(stream, interval_us, 0, count, bins);
}

// Divides by the sequence-wide max |v|. The all-zero sequence is returned
// unchanged with no scale.
inline VoxelSequence normalize_sequence(VoxelSequence seq) {
  double peak = 0.0;
  for (double v : seq.values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) {
    seq.scale.reset();
    return seq;
  }
  for (double& v : seq.values) v /= peak;
  seq.scale = peak;
  return seq;
}

// Maps signed normalised values in [-1, 1] to [0, 1] for image metrics.
inline VoxelSequence to_unit_range(VoxelSequence seq) {
  for (double& v : seq.values) v = 0.5 * (v + 1.0);
  return seq;
}

}  // namespace emotion

#endif  // EMOTION_EVENT_REPR_VOXEL_HPP_
