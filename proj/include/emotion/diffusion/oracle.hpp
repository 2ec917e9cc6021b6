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

#ifndef EMOTION_DIFFUSION_ORACLE_HPP_
#define EMOTION_DIFFUSION_ORACLE_HPP_

#include "emotion/event_repr/voxel.hpp"

namespace emotion {

// Exact posterior mean E[x0 | x_t] for i.i.d. Gaussian data N(mean, sd^2)
// under x_t = x0 + sigma * eps:  (sd^2 x + sigma^2 mean) / (sd^2 + sigma^2).
// Acts on each element independently and ignores the prompt.
struct GaussianPosteriorOracle {
  double mean = 0.0;
  double sd = 1.0;

  double operator()(double x, double sigma) const {
    const double s2 = sd * sd, g2 = sigma * sigma;
    return (s2 * x + g2 * mean) / (s2 + g2);
  }

  VoxelSequence predict_clean(const VoxelSequence& x, double sigma, const VoxelSequence&) const {
    VoxelSequence out = x;
    for (double& v : out.values) v = (*this)(v, sigma);
    return out;
  }
};

}  // namespace emotion

#endif  // EMOTION_DIFFUSION_ORACLE_HPP_
