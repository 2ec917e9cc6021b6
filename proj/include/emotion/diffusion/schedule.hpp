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

#ifndef EMOTION_DIFFUSION_SCHEDULE_HPP_
#define EMOTION_DIFFUSION_SCHEDULE_HPP_

#include <cmath>
#include <vector>

#include "emotion/core/error.hpp"

namespace emotion {

// Variance-exploding noise levels sigma_0 = 0 < sigma_1 < ... < sigma_T.
// Drift is zero and the diffusion coefficient is g(t) = sqrt(d sigma^2 / dt),
// so x_t ~ N(x_0, sigma_t^2 I).
struct NoiseSchedule {
  int steps = 0;  // T
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double sigma_data = 0.5;
  std::vector<double> levels;  // size T + 1, levels[0] = 0

  double sigma(int t) const { return levels.at(static_cast<std::size_t>(t)); }
};

struct ScheduleParams {
  int steps = 50;
  double sigma_min = 0.02;
  double sigma_max = 10.0;
  double sigma_data = 0.5;
};

// sigma_i = sigma_min * (sigma_max / sigma_min)^(i / T) for i = 1..T.
inline NoiseSchedule make_schedule(int steps, double sigma_min, double sigma_max,
                                   double sigma_data) {
  if (steps < 1) throw ParameterError("schedule needs at least one step");
  if (!(sigma_min > 0.0 && sigma_min < sigma_max && std::isfinite(sigma_max))) {
    throw ParameterError("schedule requires 0 < sigma_min < sigma_max");
  }
  if (!(sigma_data > 0.0)) throw ParameterError("sigma_data must be positive");
  NoiseSchedule s{steps, sigma_min, sigma_max, sigma_data, {}};
  s.levels.resize(static_cast<std::size_t>(steps) + 1);
  s.levels[0] = 0.0;
  const double ratio = sigma_max / sigma_min;
  for (int i = 1; i <= steps; ++i) {
    s.levels[static_cast<std::size_t>(i)] =
        (i == steps) ? sigma_max : sigma_min * std::pow(ratio, static_cast<double>(i) / steps);
  }
  return s;
}

inline NoiseSchedule make_schedule(const ScheduleParams& p) {
  return make_schedule(p.steps, p.sigma_min, p.sigma_max, p.sigma_data);
}

}  // namespace emotion

#endif  // EMOTION_DIFFUSION_SCHEDULE_HPP_
