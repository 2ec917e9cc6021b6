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

#ifndef EMOTION_DENOISER_SCALAR_DENOISER_HPP_
#define EMOTION_DENOISER_SCALAR_DENOISER_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/denoiser/precondition.hpp"
#include "emotion/event_repr/voxel.hpp"

namespace emotion {

// Elementwise toy estimator for one-dimensional diffusion experiments:
//   mu = c_skip x + c_out (w . phi),  phi = [1, u, n, u n, n^2],
// with u = c_in x and n = c_noise. The prompt is ignored.
class ScalarDenoiser {
 public:
  static constexpr std::size_t kFeatures = 5;

  explicit ScalarDenoiser(double sigma_data = 0.5) : sigma_data_(sigma_data) {}

  std::size_t parameter_count() const noexcept { return kFeatures; }
  std::span<double> parameters() noexcept { return w_; }
  std::span<const double> parameters() const noexcept { return w_; }
  std::span<double> gradients() noexcept { return g_; }
  std::span<const double> gradients() const noexcept { return g_; }
  std::span<const std::uint8_t> trainable_mask() const noexcept { return mask_; }
  void zero_grad() { g_.fill(0.0); }

  VoxelSequence predict_clean(const VoxelSequence& x, double sigma, const VoxelSequence&) {
    if (!(sigma > 0.0)) throw ParameterError("denoiser requires sigma > 0");
    pre_ = precondition(sigma, sigma_data_);
    last_x_ = x.values;
    VoxelSequence mu = x;
    mu.scale.reset();
    for (double& v : mu.values) {
      const auto phi = features(v);
      double net = 0.0;
      for (std::size_t k = 0; k < kFeatures; ++k) net += w_[k] * phi[k];
      v = pre_.c_skip * v + pre_.c_out * net;
    }
    has_forward_ = true;
    return mu;
  }

  void backward(const VoxelSequence& grad_mu) {
    if (!has_forward_) throw StateError("backward() called without a forward pass");
    if (grad_mu.values.size() != last_x_.size()) throw DataError("gradient size mismatch");
    for (std::size_t i = 0; i < last_x_.size(); ++i) {
      const auto phi = features(last_x_[i]);
      for (std::size_t k = 0; k < kFeatures; ++k) g_[k] += grad_mu.values[i] * pre_.c_out * phi[k];
    }
  }

 private:
  std::array<double, kFeatures> features(double x) const {
    const double u = pre_.c_in * x, n = pre_.c_noise;
    return {1.0, u, n, u * n, n * n};
  }

  double sigma_data_;
  std::array<double, kFeatures> w_{};
  std::array<double, kFeatures> g_{};
  std::array<std::uint8_t, kFeatures> mask_{1, 1, 1, 1, 1};
  bool has_forward_ = false;
  Preconditioning pre_{};
  std::vector<double> last_x_;
};

}  // namespace emotion

#endif  // EMOTION_DENOISER_SCALAR_DENOISER_HPP_
