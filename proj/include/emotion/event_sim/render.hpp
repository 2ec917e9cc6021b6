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

#ifndef EMOTION_EVENT_SIM_RENDER_HPP_
#define EMOTION_EVENT_SIM_RENDER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/event_sim/scene.hpp"

namespace emotion {

struct IntensityFrame {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // row-major, in [0, 1]

  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct Mask {
  int height = 0;
  int width = 0;
  std::uint32_t t_us = 0;
  std::vector<std::uint8_t> cells;  // row-major, 0 or 1

  bool at(int y, int x) const { return cells[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
  }
};

namespace detail {

// Object pose at time t: centre (x, y) and rotation angle.
struct Pose {
  double cx, cy, angle;
};

inline std::array<double, 2> shake_offset(const SceneSpec& spec, double t_s) {
  if (spec.shake.amplitude == 0.0) return {0.0, 0.0};
  // Phase is fixed by the scene seed.
  const double phase = 2.0 * std::numbers::pi * RandomSource(spec.seed, 0x5ca1e).uniform_at(0);
  const double w = 2.0 * std::numbers::pi * spec.shake.frequency * t_s;
  return {spec.shake.amplitude * std::sin(w + phase),
          spec.shake.amplitude * std::sin(w + phase + 0.5 * std::numbers::pi)};
}

inline Pose pose_at(const SceneSpec& spec, const SceneObject& o, double t_s) {
  const auto shake = shake_offset(spec, t_s);
  return {o.position[0] + o.velocity[0] * t_s + shake[0],
          o.position[1] + o.velocity[1] * t_s + shake[1], o.angular_velocity * t_s};
}

// Half-open coverage test of a pixel centre against the object footprint.
inline bool covers(const SceneObject& o, const Pose& pose, double px, double py) {
  const double dx = px - pose.cx;
  const double dy = py - pose.cy;
  double u = dx, v = dy;
  if (pose.angle != 0.0) {
    const double c = std::cos(pose.angle), s = std::sin(pose.angle);
    u = c * dx + s * dy;
    v = -s * dx + c * dy;
  }
  if (o.shape == ShapeKind::kDisk) {
    const double r = 0.5 * o.size[0];
    return u * u + v * v < r * r;
  }
  const double hw = 0.5 * o.size[0], hh = 0.5 * o.size[1];
  return u >= -hw && u < hw && v >= -hh && v < hh;
}

inline void check_time(const SceneSpec& spec, std::int64_t t_us) {
  if (t_us < 0 || t_us > static_cast<std::int64_t>(spec.duration_us)) {
    throw RangeError("time " + std::to_string(t_us) + " us outside [0, " +
                     std::to_string(spec.duration_us) + "]");
  }
}

// Bounding box (inclusive pixel range) of an object footprint.
struct PixelBox {
  int x0, x1, y0, y1;
};

inline PixelBox footprint_box(const SceneSpec& spec, const SceneObject& o, const Pose& pose) {
  const double r = (o.shape == ShapeKind::kDisk)
                       ? 0.5 * o.size[0]
                       : 0.5 * std::hypot(o.size[0], o.size[1]);
  const auto clampi = [](double v, int lo, int hi) {
    return static_cast<int>(std::clamp(v, static_cast<double>(lo), static_cast<double>(hi)));
  };
  return {clampi(std::floor(pose.cx - r - 1.0), 0, spec.width - 1),
          clampi(std::ceil(pose.cx + r + 1.0), 0, spec.width - 1),
          clampi(std::floor(pose.cy - r - 1.0), 0, spec.height - 1),
          clampi(std::ceil(pose.cy + r + 1.0), 0, spec.height - 1)};
}

}  // namespace detail

// Intensity image at time t; objects are composited in declaration order.
inline IntensityFrame render_scene(const SceneSpec& spec, std::int64_t t_us) {
  detail::check_time(spec, t_us);
  IntensityFrame frame{spec.height, spec.width,
                       std::vector<double>(static_cast<std::size_t>(spec.height) * spec.width,
                                           std::clamp(spec.background, 0.0, 1.0))};
  const double t_s = static_cast<double>(t_us) / 1e6;
  for (const auto& o : spec.objects) {
    const auto pose = detail::pose_at(spec, o, t_s);
    const auto box = detail::footprint_box(spec, o, pose);
    const double value = std::clamp(o.intensity, 0.0, 1.0);
    for (int y = box.y0; y <= box.y1; ++y) {
      for (int x = box.x0; x <= box.x1; ++x) {
        if (detail::covers(o, pose, x + 0.5, y + 0.5)) {
          frame.values[static_cast<std::size_t>(y) * spec.width + x] = value;
        }
      }
    }
  }
  return frame;
}

// True exactly where some object covers the pixel centre at time t.
inline Mask object_mask(const SceneSpec& spec, std::int64_t t_us) {
  detail::check_time(spec, t_us);
  Mask mask{spec.height, spec.width, static_cast<std::uint32_t>(t_us),
            std::vector<std::uint8_t>(static_cast<std::size_t>(spec.height) * spec.width, 0)};
  const double t_s = static_cast<double>(t_us) / 1e6;
  for (const auto& o : spec.objects) {
    const auto pose = detail::pose_at(spec, o, t_s);
    const auto box = detail::footprint_box(spec, o, pose);
    for (int y = box.y0; y <= box.y1; ++y) {
      for (int x = box.x0; x <= box.x1; ++x) {
        if (detail::covers(o, pose, x + 0.5, y + 0.5)) {
          mask.cells[static_cast<std::size_t>(y) * spec.width + x] = 1;
        }
      }
    }
  }
  return mask;
}

}  // namespace emotion

#endif  // EMOTION_EVENT_SIM_RENDER_HPP_
