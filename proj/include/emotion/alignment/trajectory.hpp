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

#ifndef EMOTION_ALIGNMENT_TRAJECTORY_HPP_
#define EMOTION_ALIGNMENT_TRAJECTORY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/diffusion/model.hpp"
#include "emotion/diffusion/schedule.hpp"
#include "emotion/event_repr/voxel.hpp"
#include "emotion/sampler/guided_sampler.hpp"

namespace emotion {

// log N(x | mean, sigma^2 I), summed over elements [nats].
inline double step_log_density(std::span<const double> x, std::span<const double> mean,
                               double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("step density needs sigma > 0");
  if (x.size() != mean.size()) throw DataError("step density size mismatch");
  const double norm = std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - mean[i]) / sigma;
    s += -0.5 * z * z - norm;
  }
  return s;
}

inline double step_log_density(double x, double mean, double sigma) {
  return step_log_density(std::span<const double>(&x, 1), std::span<const double>(&mean, 1), sigma);
}

// KL between equal-variance Gaussians: |m_a - m_b|^2 / (2 sigma^2).
inline double gaussian_kl(std::span<const double> mean_a, std::span<const double> mean_b,
                          double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("KL needs sigma > 0");
  if (mean_a.size() != mean_b.size()) throw DataError("KL size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mean_a.size(); ++i) {
    const double d = mean_a[i] - mean_b[i];
    s += d * d;
  }
  return s / (2.0 * sigma * sigma);
}

// One recorded transition of the stochastic reverse chain. The Gaussian
// mean of `next` is state + shrink * (mu - state) where mu is the clean
// estimate at `state`.
struct TrajectoryStep {
  int t = 0;
  double sigma_t = 0.0;
  double sigma_step = 0.0;  // zero for the deterministic final step
  double shrink = 0.0;
  VoxelSequence state;
  VoxelSequence mu_ref;  // reference estimator output at `state`
  VoxelSequence next;

  bool scored() const noexcept { return sigma_step > 0.0; }
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;  // t = T .. 1
  VoxelSequence sample;               // x_O
  std::size_t prompt_index = 0;
  std::uint64_t index = 0;            // position within its generation
  std::uint64_t stamp = 0;            // reference policy version
};

inline VoxelSequence step_mean(const VoxelSequence& state, const VoxelSequence& mu, double shrink) {
  VoxelSequence m = state;
  for (std::size_t i = 0; i < m.size(); ++i) m.values[i] += shrink * (mu.values[i] - state.values[i]);
  return m;
}

// Runs the guided sampler with ancestral noise and keeps every transition.
template <CleanEstimator M>
Trajectory record_trajectory(M& model, const VoxelSequence& prompt, const NoiseSchedule& schedule,
                             SamplerConfig cfg) {
  cfg.renoise = true;
  Trajectory traj;
  traj.steps.reserve(static_cast<std::size_t>(schedule.steps));
  traj.sample = sample(model, prompt, schedule, cfg, [&](const StepRecord& r) {
    TrajectoryStep step;
    step.t = r.t;
    step.sigma_t = r.sigma_t;
    step.sigma_step = r.sigma_step;
    const double target = r.sigma_step > 0.0 ? ancestral_split(r.sigma_t, r.sigma_prev).sigma_down
                                             : r.sigma_prev;
    step.shrink = (r.sigma_t - target) / r.sigma_t;
    step.state = r.state;
    step.mu_ref = r.mu;
    step.next = r.next;
    traj.steps.push_back(std::move(step));
  });
  return traj;
}

struct ImportanceTerm {
  double ratio = 1.0;          // product of clipped per-step ratios
  double log_ratio = 0.0;      // unclipped sum of per-step log ratios
  std::vector<double> step_ratio;
  std::vector<std::uint8_t> clipped;
  std::vector<VoxelSequence> mu;  // current estimator output per step
};

// r = prod_t clip(p_theta(x_{t-1} | x_t) / p_ref(x_{t-1} | x_t), 1 - kappa, 1 + kappa)
// over scored steps.
template <CleanEstimator M>
ImportanceTerm importance_term(M& model, const Trajectory& traj, std::span<const VoxelSequence> prompts,
                               std::uint64_t current_stamp, double clip) {
  if (traj.stamp != current_stamp) {
    throw StalenessError("trajectory from reference " + std::to_string(traj.stamp) +
                         ", current is " + std::to_string(current_stamp));
  }
  if (traj.prompt_index >= prompts.size()) throw DataError("trajectory prompt index out of range");
  const VoxelSequence& prompt = prompts[traj.prompt_index];
  ImportanceTerm term;
  for (const auto& step : traj.steps) {
    VoxelSequence mu = model.predict_clean(step.state, step.sigma_t, prompt);
    double r = 1.0;
    bool clipped = false;
    if (step.scored()) {
      const VoxelSequence m = step_mean(step.state, mu, step.shrink);
      const VoxelSequence m_ref = step_mean(step.state, step.mu_ref, step.shrink);
      const double lr = step_log_density(step.next.values, m.values, step.sigma_step) -
                        step_log_density(step.next.values, m_ref.values, step.sigma_step);
      term.log_ratio += lr;
      r = std::exp(lr);
      const double c = std::clamp(r, 1.0 - clip, 1.0 + clip);
      clipped = c != r;
      r = c;
    }
    term.ratio *= r;
    term.step_ratio.push_back(r);
    term.clipped.push_back(clipped ? 1 : 0);
    term.mu.push_back(std::move(mu));
  }
  return term;
}

// Sum over scored steps of KL(p_ref || p_theta) between the step Gaussians.
inline double kl_regularizer(const Trajectory& traj, std::span<const VoxelSequence> mu) {
  if (mu.size() != traj.steps.size()) throw DataError("KL needs one estimate per step");
  double kl = 0.0;
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const auto& step = traj.steps[i];
    if (!step.scored()) continue;
    const VoxelSequence m = step_mean(step.state, mu[i], step.shrink);
    const VoxelSequence m_ref = step_mean(step.state, step.mu_ref, step.shrink);
    kl += gaussian_kl(m_ref.values, m.values, step.sigma_step);
  }
  return kl;
}

template <CleanEstimator M>
double kl_regularizer(M& model, const Trajectory& traj, std::span<const VoxelSequence> prompts) {
  std::vector<VoxelSequence> mu;
  for (const auto& step : traj.steps) {
    mu.push_back(model.predict_clean(step.state, step.sigma_t, prompts[traj.prompt_index]));
  }
  return kl_regularizer(traj, mu);
}

}  // namespace emotion

#endif  // EMOTION_ALIGNMENT_TRAJECTORY_HPP_
