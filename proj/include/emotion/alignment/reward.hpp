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

#ifndef EMOTION_ALIGNMENT_REWARD_HPP_
#define EMOTION_ALIGNMENT_REWARD_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emotion/alignment/trajectory.hpp"
#include "emotion/core/error.hpp"
#include "emotion/event_repr/voxel.hpp"
#include "emotion/metrics/feature_distance.hpp"
#include "emotion/metrics/image_metrics.hpp"

namespace emotion {

struct RewardRecord {
  double ssim_term = 0.0;
  double distance_term = 0.0;
  double mse_term = 0.0;
  double raw = 0.0;
  double standardized = 0.0;
  double adjusted = 0.0;  // standardized + beta * (std(x) - std_min)
  double sample_std = 0.0;
};

// The default is SSIM plus twice the negated distance. A nonzero `mse` weight
// gives the mixed-metric variant, which is not recommended.
struct RewardWeights {
  double ssim = 1.0;
  double distance = 2.0;
  double mse = 0.0;
};

inline double population_std(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size()));
}

// Raw reward: w_ssim * SSIM(sample, target) - w_dist * D_feat({sample}, reference)
// - w_mse * MSE(sample, target).
inline RewardRecord score_sample(const VoxelSequence& sample, const VoxelSequence& target,
                                 std::span<const VoxelSequence> reference,
                                 const RewardWeights& w = {}) {
  require_same_shape(sample, target, "reward");
  RewardRecord r;
  r.ssim_term = ssim(to_metric_range(sample), to_metric_range(target));
  r.distance_term = -feature_video_distance(std::span<const VoxelSequence>(&sample, 1), reference);
  r.mse_term = w.mse != 0.0 ? -mse(sample, target) : 0.0;
  r.raw = w.ssim * r.ssim_term + w.distance * r.distance_term + w.mse * r.mse_term;
  r.sample_std = population_std(sample.values);
  return r;
}

// Standardizes raw rewards to zero mean and unit population variance across
// the batch, then adds the diversity bonus. Batches of fewer than two
// records, or with identical raw rewards, standardize to zero.
inline void normalize_rewards(std::span<RewardRecord> batch, double beta) {
  if (batch.empty()) return;
  const double n = static_cast<double>(batch.size());
  double mean = 0.0;
  for (const auto& r : batch) mean += r.raw;
  mean /= n;
  double var = 0.0;
  for (const auto& r : batch) var += (r.raw - mean) * (r.raw - mean);
  const double sd = std::sqrt(var / n);
  const bool degenerate = batch.size() < 2 || !(sd > 0.0) || sd < 1e-12 * std::max(1.0, std::abs(mean));
  double std_min = batch.front().sample_std;
  for (const auto& r : batch) std_min = std::min(std_min, r.sample_std);
  for (auto& r : batch) {
    r.standardized = degenerate ? 0.0 : (r.raw - mean) / sd;
    r.adjusted = r.standardized + beta * (r.sample_std - std_min);
  }
}

// Mean and population variance of the standardized rewards.
inline std::pair<double, double> standardized_moments(std::span<const RewardRecord> batch) {
  if (batch.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(batch.size());
  double mean = 0.0;
  for (const auto& r : batch) mean += r.standardized;
  mean /= n;
  double var = 0.0;
  for (const auto& r : batch) var += (r.standardized - mean) * (r.standardized - mean);
  return {mean, var / n};
}

// Reward for event-voxel trajectories: each prompt index owns a ground-truth
// clip and the batch's targets form the reference set of the distance term.
class SequenceReward {
 public:
  SequenceReward(std::vector<VoxelSequence> targets, RewardWeights weights = {})
      : targets_(std::move(targets)), weights_(weights) {}

  std::vector<RewardRecord> operator()(std::span<const Trajectory> pool) const {
    std::vector<VoxelSequence> reference;
    reference.reserve(pool.size());
    for (const auto& t : pool) reference.push_back(target(t.prompt_index));
    std::vector<RewardRecord> out;
    out.reserve(pool.size());
    for (const auto& t : pool) {
      out.push_back(score_sample(t.sample, target(t.prompt_index), reference, weights_));
    }
    return out;
  }

 private:
  const VoxelSequence& target(std::size_t i) const {
    if (i >= targets_.size()) throw DataError("no target for prompt " + std::to_string(i));
    return targets_[i];
  }

  std::vector<VoxelSequence> targets_;
  RewardWeights weights_;
};

// Reward of a scalar sample: -(x - goal)^2.
class QuadraticReward {
 public:
  explicit QuadraticReward(double goal) : goal_(goal) {}

  std::vector<RewardRecord> operator()(std::span<const Trajectory> pool) const {
    std::vector<RewardRecord> out;
    for (const auto& t : pool) {
      if (t.sample.size() != 1) throw DataError("quadratic reward needs scalar samples");
      RewardRecord r;
      const double d = t.sample.values[0] - goal_;
      r.raw = -d * d;
      out.push_back(r);
    }
    return out;
  }

 private:
  double goal_;
};

}  // namespace emotion

#endif  // EMOTION_ALIGNMENT_REWARD_HPP_
