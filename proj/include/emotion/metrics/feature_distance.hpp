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

#ifndef EMOTION_METRICS_FEATURE_DISTANCE_HPP_
#define EMOTION_METRICS_FEATURE_DISTANCE_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/event_repr/voxel.hpp"

namespace emotion {

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Mean and population covariance (divided by n) of row-vector embeddings.
inline GaussianFit fit_gaussian(const std::vector<std::vector<double>>& embeddings) {
  if (embeddings.empty()) throw ParameterError("cannot fit a Gaussian to an empty set");
  const auto d = static_cast<Eigen::Index>(embeddings.front().size());
  const auto n = static_cast<Eigen::Index>(embeddings.size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(embeddings[static_cast<std::size_t>(i)].size()) != d) {
      throw DataError("embedding dimensions differ");
    }
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(embeddings[static_cast<std::size_t>(i)].data(), d);
  }
  GaussianFit g;
  g.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  g.cov = centered.transpose() * centered / static_cast<double>(n);
  return g;
}

namespace detail {

inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

// Squared 2-Wasserstein (Frechet) distance between two Gaussians:
//   |m1 - m2|^2 + tr(S1) + tr(S2) - 2 tr((S1^1/2 S2 S1^1/2)^1/2).
inline double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  if (a.mean.size() != b.mean.size()) throw DataError("Gaussian dimensions differ");
  const Eigen::MatrixXd ra = detail::psd_sqrt(a.cov);
  const Eigen::MatrixXd inner = ra * b.cov * ra;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()),
                                                          Eigen::EigenvaluesOnly);
  const double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * cross;
  return std::max(0.0, d);
}

inline double frechet_from_embeddings(const std::vector<std::vector<double>>& a,
                                      const std::vector<std::vector<double>>& b, double ridge) {
  GaussianFit fa = fit_gaussian(a), fb = fit_gaussian(b);
  fa.cov.diagonal().array() += ridge;
  fb.cov.diagonal().array() += ridge;
  return frechet_distance(fa, fb);
}

// Frozen random convolutional video embedding. Weights are drawn once from
// seed 0 and never trained. Per frame, each 3x3xB filter response (periodic
// padding) is rectified and averaged over pixels; the embedding concatenates
// the mean over frames, the mean absolute change between consecutive frames
// and the maximum over frames of those responses.
class RandomFeatureEmbedder {
 public:
  static constexpr int kFilters = 8;

  explicit RandomFeatureEmbedder(int bins) : bins_(bins) {
    if (bins < 1) throw ParameterError("embedder needs at least one bin");
    const RandomSource rng(0, 0xfeed0000 + static_cast<std::uint64_t>(bins));
    weights_.resize(static_cast<std::size_t>(kFilters) * bins * 9);
    const double bound = 1.0 / std::sqrt(9.0 * bins);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      weights_[i] = bound * (2.0 * rng.uniform_at(i) - 1.0);
    }
  }

  int dimension() const noexcept { return 3 * kFilters; }

  std::vector<double> embed(const VoxelSequence& seq) const {
    if (seq.bins != bins_) throw DataError("embedder bin count mismatch");
    if (seq.frames < 1) throw DataError("cannot embed an empty sequence");
    const int h = seq.height, w = seq.width;
    std::vector<std::vector<double>> per_frame(static_cast<std::size_t>(seq.frames),
                                               std::vector<double>(kFilters, 0.0));
    for (int f = 0; f < seq.frames; ++f) {
      for (int k = 0; k < kFilters; ++k) {
        double acc = 0.0;
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            double r = 0.0;
            for (int b = 0; b < bins_; ++b) {
              for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                  const int yy = (y + dy + h) % h, xx = (x + dx + w) % w;
                  r += weight(k, b, dy + 1, dx + 1) * seq.at(f, b, yy, xx);
                }
              }
            }
            acc += std::max(0.0, r);
          }
        }
        per_frame[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)] =
            acc / (static_cast<double>(h) * w);
      }
    }
    std::vector<double> e(static_cast<std::size_t>(dimension()), 0.0);
    for (int k = 0; k < kFilters; ++k) {
      double mean = 0.0, change = 0.0, peak = 0.0;
      for (int f = 0; f < seq.frames; ++f) {
        const double v = per_frame[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)];
        mean += v;
        peak = std::max(peak, v);
        if (f > 0) change += std::abs(v - per_frame[static_cast<std::size_t>(f - 1)][static_cast<std::size_t>(k)]);
      }
      e[static_cast<std::size_t>(k)] = mean / seq.frames;
      e[static_cast<std::size_t>(kFilters + k)] = seq.frames > 1 ? change / (seq.frames - 1) : 0.0;
      e[static_cast<std::size_t>(2 * kFilters + k)] = peak;
    }
    return e;
  }

 private:
  double weight(int k, int b, int ky, int kx) const {
    return weights_[((static_cast<std::size_t>(k) * bins_ + b) * 3 + ky) * 3 + kx];
  }

  int bins_;
  std::vector<double> weights_;
};

inline constexpr double kFeatureRidge = 1e-6;

// Frechet distance between Gaussian fits of the two sets' random-feature
// embeddings, with a ridge on both covariances.
inline double feature_video_distance(std::span<const VoxelSequence> set_a,
                                     std::span<const VoxelSequence> set_b,
                                     double ridge = kFeatureRidge) {
  if (set_a.empty() || set_b.empty()) throw ParameterError("feature distance of an empty set");
  const VoxelSequence& ref = set_a.front();
  for (const auto& s : set_a) require_same_shape(ref, s, "feature distance");
  for (const auto& s : set_b) require_same_shape(ref, s, "feature distance");
  const RandomFeatureEmbedder embedder(ref.bins);
  std::vector<std::vector<double>> ea, eb;
  for (const auto& s : set_a) ea.push_back(embedder.embed(s));
  for (const auto& s : set_b) eb.push_back(embedder.embed(s));
  return frechet_from_embeddings(ea, eb, ridge);
}

}  // namespace emotion

#endif  // EMOTION_METRICS_FEATURE_DISTANCE_HPP_
