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

#ifndef EMOTION_METRICS_IMAGE_METRICS_HPP_
#define EMOTION_METRICS_IMAGE_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/event_repr/voxel.hpp"

namespace emotion {

inline double mse(const VoxelSequence& a, const VoxelSequence& b) {
  require_same_shape(a, b, "mse");
  if (a.size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

// Signed voxel values in [-1, 1] mapped to [0, 1] and clamped, for SSIM.
inline VoxelSequence to_metric_range(const VoxelSequence& seq) {
  VoxelSequence out = to_unit_range(seq);
  for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

namespace detail {

inline std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size));
  const double c = 0.5 * (size - 1);
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    w[static_cast<std::size_t>(i)] = std::exp(-((i - c) * (i - c)) / (2.0 * sigma * sigma));
    total += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= total;
  return w;
}

// Separable "valid" filtering of an H x W image.
inline std::vector<double> filter_valid(std::span<const double> img, int h, int w,
                                        const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1, oh = h - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * img[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace detail

// Windowed SSIM of two H x W images in [0, 1], averaged over every window
// position that fits inside the image. Images smaller than the window use
// the largest odd window that fits.
inline double ssim_image(std::span<const double> a, std::span<const double> b, int h, int w,
                         const SsimParams& p = {}) {
  if (a.size() != b.size() || a.size() != static_cast<std::size_t>(h) * w) {
    throw DataError("ssim: image size mismatch");
  }
  int win = std::min({p.window, h, w});
  if (win % 2 == 0) --win;
  const auto k = detail::gaussian_window(win, p.sigma);
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = detail::filter_valid(a, h, w, k);
  const auto mu_b = detail::filter_valid(b, h, w, k);
  const auto e_aa = detail::filter_valid(aa, h, w, k);
  const auto e_bb = detail::filter_valid(bb, h, w, k);
  const auto e_ab = detail::filter_valid(ab, h, w, k);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double va = e_aa[i] - mu_a[i] * mu_a[i];
    const double vb = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    total += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
             ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

// Mean SSIM over every (frame, bin) image of two sequences with values in
// [0, 1].
inline double ssim(const VoxelSequence& a, const VoxelSequence& b, const SsimParams& p = {}) {
  require_same_shape(a, b, "ssim");
  constexpr double kSlack = 1e-9;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.values[i] < -kSlack || a.values[i] > 1.0 + kSlack || b.values[i] < -kSlack ||
        b.values[i] > 1.0 + kSlack) {
      throw DataError("ssim inputs must lie in [0, 1]");
    }
  }
  const std::size_t plane = static_cast<std::size_t>(a.height) * a.width;
  const std::size_t images = static_cast<std::size_t>(a.frames) * a.bins;
  if (images == 0) throw DataError("ssim of empty sequences");
  double total = 0.0;
  for (std::size_t i = 0; i < images; ++i) {
    total += ssim_image(std::span<const double>(a.values).subspan(i * plane, plane),
                        std::span<const double>(b.values).subspan(i * plane, plane), a.height,
                        a.width, p);
  }
  return total / static_cast<double>(images);
}

}  // namespace emotion

#endif  // EMOTION_METRICS_IMAGE_METRICS_HPP_
