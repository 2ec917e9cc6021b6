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

// Reference computations for tests, written independently of the library
// code they check.

#ifndef EMOTION_TESTS_SUPPORT_ORACLES_HPP_
#define EMOTION_TESTS_SUPPORT_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace emotion::testing {

// sigma_0 = 0, sigma_i = smin * (smax / smin)^(i / T), with sigma_T = smax.
inline std::vector<double> reference_sigmas(int steps, double smin, double smax) {
  std::vector<double> s(static_cast<std::size_t>(steps) + 1, 0.0);
  for (int i = 1; i <= steps; ++i) {
    s[static_cast<std::size_t>(i)] = smin * std::exp(std::log(smax / smin) * i / steps);
  }
  s[static_cast<std::size_t>(steps)] = smax;
  return s;
}

// Posterior mean of a N(m, sd^2) variable observed with N(0, sigma^2) noise.
inline double gaussian_posterior_mean(double x, double sigma, double m, double sd) {
  const double v = sd * sd;
  return m + v / (v + sigma * sigma) * (x - m);
}

// Deterministic reverse chain x_T -> x_0 for a scalar, one step per level:
//   x <- x - (sigma_t - sigma_{t-1}) * (x - mu(x, sigma_t)) / sigma_t.
inline double scalar_chain(double x_T, const std::vector<double>& sigmas,
                           const std::function<double(double, double)>& mu) {
  double x = x_T;
  for (std::size_t t = sigmas.size() - 1; t >= 1; --t) {
    const double st = sigmas[t], sp = sigmas[t - 1];
    x = x - (st - sp) * (x - mu(x, st)) / st;
  }
  return x;
}

struct Moments {
  double mean;
  double sd;
};

// Mean and standard deviation of phi(Z) for Z ~ N(0, scale^2), by the
// trapezoid rule on [-width, width] standard deviations.
inline Moments gaussian_pushforward(const std::function<double(double)>& phi, double scale,
                                    int points = 20001, double width = 10.0) {
  const double h = 2.0 * width / (points - 1);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < points; ++i) {
    const double z = -width + i * h;
    const double w = ((i == 0 || i == points - 1) ? 0.5 : 1.0) * std::exp(-0.5 * z * z);
    const double y = phi(scale * z);
    m0 += w;
    m1 += w * y;
    m2 += w * y * y;
  }
  const double mean = m1 / m0;
  return {mean, std::sqrt(std::max(0.0, m2 / m0 - mean * mean))};
}

// Central finite difference of f at x along coordinate i.
template <typename F>
double central_difference(F&& f, std::vector<double>& x, std::size_t i, double h) {
  const double keep = x[i];
  x[i] = keep + h;
  const double up = f();
  x[i] = keep - h;
  const double down = f();
  x[i] = keep;
  return (up - down) / (2.0 * h);
}

// Windowed SSIM of two constant images with means a and b (all variances
// zero): (2ab + C1) / (a^2 + b^2 + C1) with C1 = (0.01 L)^2.
inline double constant_ssim(double a, double b, double range = 1.0) {
  const double c1 = (0.01 * range) * (0.01 * range);
  return (2.0 * a * b + c1) / (a * a + b * b + c1);
}

// Frechet distance of two 1-D Gaussians.
inline double scalar_frechet(double m1, double v1, double m2, double v2) {
  return (m1 - m2) * (m1 - m2) + v1 + v2 - 2.0 * std::sqrt(v1 * v2);
}

}  // namespace emotion::testing

#endif  // EMOTION_TESTS_SUPPORT_ORACLES_HPP_
