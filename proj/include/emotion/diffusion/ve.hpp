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

#ifndef EMOTION_DIFFUSION_VE_HPP_
#define EMOTION_DIFFUSION_VE_HPP_

#include <algorithm>
#include <cmath>
#include <span>

#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/event_repr/voxel.hpp"

namespace emotion {

// x0 + sigma * eps with eps drawn element by element from `rng`.
inline VoxelSequence perturb(VoxelSequence x0, double sigma, RandomSource& rng) {
  if (!(sigma >= 0.0)) throw ParameterError("noise level must be non-negative");
  if (sigma == 0.0) return x0;
  for (double& v : x0.values) v += sigma * rng.normal();
  return x0;
}

// One reverse step
//   x_{t-1} = x_t - (x_t - mu) / sigma_t * (sigma_t - sigma_prev),
// i.e. linear interpolation from x_t toward mu in sigma.
inline void reverse_step(std::span<const double> x_t, std::span<const double> mu, double sigma_t,
                         double sigma_prev, std::span<double> out) {
  if (!(sigma_t > 0.0)) throw NumericalError("reverse step from sigma_t = 0");
  if (x_t.size() != mu.size() || out.size() != x_t.size()) {
    throw DataError("reverse step size mismatch");
  }
  const double k = (sigma_t - sigma_prev) / sigma_t;
  for (std::size_t i = 0; i < x_t.size(); ++i) out[i] = x_t[i] - (x_t[i] - mu[i]) * k;
}

inline double reverse_step(double x_t, double mu, double sigma_t, double sigma_prev) {
  if (!(sigma_t > 0.0)) throw NumericalError("reverse step from sigma_t = 0");
  return x_t - (x_t - mu) / sigma_t * (sigma_t - sigma_prev);
}

// Ancestral split of a step sigma_t -> sigma_prev: a deterministic move to
// sigma_down followed by fresh noise of scale sigma_up, with
// sigma_down^2 + sigma_up^2 = sigma_prev^2.
struct AncestralStep {
  double sigma_down = 0.0;
  double sigma_up = 0.0;
};

inline AncestralStep ancestral_split(double sigma_t, double sigma_prev) {
  if (!(sigma_t > 0.0) || sigma_prev < 0.0 || sigma_prev > sigma_t) {
    throw ParameterError("ancestral step requires 0 <= sigma_prev <= sigma_t, sigma_t > 0");
  }
  const double up = std::sqrt(sigma_prev * sigma_prev * (sigma_t * sigma_t - sigma_prev * sigma_prev) /
                              (sigma_t * sigma_t));
  const double down = std::sqrt(std::max(0.0, sigma_prev * sigma_prev - up * up));
  return {down, up};
}

// Loss weight lambda(t) = (sigma_t^2 + sigma_data^2) / (sigma_t + sigma_data)^2.
inline double loss_weight(double sigma_t, double sigma_data) {
  if (!(sigma_data > 0.0)) throw ParameterError("sigma_data must be positive");
  if (!(sigma_t >= 0.0)) throw ParameterError("sigma_t must be non-negative");
  const double d = sigma_t + sigma_data;
  return (sigma_t * sigma_t + sigma_data * sigma_data) / (d * d);
}

}  // namespace emotion

#endif  // EMOTION_DIFFUSION_VE_HPP_
