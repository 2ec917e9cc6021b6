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

#ifndef EMOTION_DENOISER_PRECONDITION_HPP_
#define EMOTION_DENOISER_PRECONDITION_HPP_

#include <cmath>

namespace emotion {

// Scalar preconditioning of the clean-signal estimate
//   mu(x, sigma) = c_skip x + c_out F(c_in x, c_noise).
// As sigma -> 0, c_skip -> 1 and c_out -> 0, so mu -> x.
struct Preconditioning {
  double c_skip;
  double c_out;
  double c_in;
  double c_noise;
};

inline Preconditioning precondition(double sigma, double sigma_data) {
  const double s2 = sigma * sigma, d2 = sigma_data * sigma_data;
  const double root = std::sqrt(s2 + d2);
  return {d2 / (s2 + d2), sigma * sigma_data / root, 1.0 / root,
          sigma > 0.0 ? 0.25 * std::log(sigma) : -10.0};
}

}  // namespace emotion

#endif  // EMOTION_DENOISER_PRECONDITION_HPP_
