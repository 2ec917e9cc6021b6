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

#ifndef EMOTION_EVENT_SIM_SUITE_HPP_
#define EMOTION_EVENT_SIM_SUITE_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/event_sim/scene.hpp"

namespace emotion {

struct SuiteSpec {
  std::string name = "moving-square";
  int count = 200;
  int height = 64;
  int width = 64;
  std::uint32_t duration_us = 320000;
  std::uint64_t seed = 0;
};

// One square per scene with a symmetric contrast pair (object a, background
// 1 - a), random side, heading and speed. The square passes near the canvas
// centre at mid-duration so it stays (mostly) in view.
inline SceneSpec moving_square_scene(const SuiteSpec& suite, int index) {
  RandomSource rng = RandomSource(suite.seed, 0x5017e).fork(static_cast<std::uint64_t>(index));
  SceneSpec s;
  s.height = suite.height;
  s.width = suite.width;
  s.duration_us = suite.duration_us;
  s.seed = suite.seed * 1000003ull + static_cast<std::uint64_t>(index);

  const double a = rng.uniform(0.65, 0.9);
  const bool bright_object = rng.uniform() < 0.5;
  s.background = bright_object ? 1.0 - a : a;

  const double scale = std::min(suite.height, suite.width) / 64.0;
  const double side = std::round(rng.uniform(8.0, 14.0) * scale);
  const double speed = rng.uniform(40.0, 120.0) * scale;
  const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double vx = speed * std::cos(heading), vy = speed * std::sin(heading);
  const double half_t = 0.5 * suite.duration_us / 1e6;
  const double mx = 0.5 * suite.width + rng.uniform(-8.0, 8.0) * scale;
  const double my = 0.5 * suite.height + rng.uniform(-8.0, 8.0) * scale;

  SceneObject sq;
  sq.shape = ShapeKind::kRectangle;
  sq.size = {side, side};
  sq.position = {std::clamp(mx - vx * half_t, 0.0, suite.width - 1e-6),
                 std::clamp(my - vy * half_t, 0.0, suite.height - 1e-6)};
  sq.velocity = {vx, vy};
  sq.intensity = bright_object ? a : 1.0 - a;
  s.objects.push_back(sq);
  return s;
}

inline std::vector<SceneSpec> make_suite(const SuiteSpec& suite) {
  if (suite.name != "moving-square") throw ParameterError("unknown scene suite: " + suite.name);
  if (suite.count <= 0) throw ParameterError("suite scene count must be positive");
  std::vector<SceneSpec> scenes;
  scenes.reserve(static_cast<std::size_t>(suite.count));
  for (int i = 0; i < suite.count; ++i) scenes.push_back(moving_square_scene(suite, i));
  return scenes;
}

}  // namespace emotion

#endif  // EMOTION_EVENT_SIM_SUITE_HPP_
