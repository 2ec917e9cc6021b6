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

#ifndef EMOTION_DIFFUSION_ADAM_HPP_
#define EMOTION_DIFFUSION_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "emotion/core/error.hpp"

namespace emotion {

struct AdamParams {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Entries whose mask byte is zero are frozen:
// their moments and values are never touched.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, AdamParams p) : params_(p), m_(n, 0.0), v_(n, 0.0) {}

  const AdamParams& params() const noexcept { return params_; }
  void set_learning_rate(double lr) noexcept { params_.learning_rate = lr; }
  std::uint64_t step_count() const noexcept { return t_; }

  template <typename Scalar>
  void step(std::span<Scalar> weights, std::span<const Scalar> grads,
            std::span<const std::uint8_t> mask) {
    if (weights.size() != m_.size() || grads.size() != m_.size() || mask.size() != m_.size()) {
      throw DataError("optimizer size mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(params_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(params_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
      if (!mask[i]) continue;
      const double g = static_cast<double>(grads[i]);
      m_[i] = params_.beta1 * m_[i] + (1.0 - params_.beta1) * g;
      v_[i] = params_.beta2 * v_[i] + (1.0 - params_.beta2) * g * g;
      const double update =
          params_.learning_rate * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + params_.epsilon);
      weights[i] = static_cast<Scalar>(static_cast<double>(weights[i]) - update);
    }
  }

 private:
  AdamParams params_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace emotion

#endif  // EMOTION_DIFFUSION_ADAM_HPP_
