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

#ifndef EMOTION_DIFFUSION_MODEL_HPP_
#define EMOTION_DIFFUSION_MODEL_HPP_

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>

#include "emotion/event_repr/voxel.hpp"

namespace emotion {

// Anything that estimates the clean sequence from a noised one at level sigma,
// conditioned on prompt frames.
template <typename M>
concept CleanEstimator = requires(M& m, const VoxelSequence& x, double sigma,
                                  const VoxelSequence& prompt) {
  { m.predict_clean(x, sigma, prompt) } -> std::convertible_to<VoxelSequence>;
};

// A clean estimator with a flat parameter vector and reverse-mode gradients.
// backward() accumulates d(loss)/d(params) given d(loss)/d(output) of the most
// recent predict_clean() call.
template <typename M>
concept TrainableEstimator =
    CleanEstimator<M> && std::copy_constructible<M> &&
    requires(M& m, const M& cm, const VoxelSequence& grad_out) {
      m.backward(grad_out);
      m.zero_grad();
      { cm.parameter_count() } -> std::convertible_to<std::size_t>;
      { m.parameters() };
      { m.gradients() };
      { cm.trainable_mask() } -> std::convertible_to<std::span<const std::uint8_t>>;
    };

}  // namespace emotion

#endif  // EMOTION_DIFFUSION_MODEL_HPP_
