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

#ifndef EMOTION_SAMPLER_GUIDED_SAMPLER_HPP_
#define EMOTION_SAMPLER_GUIDED_SAMPLER_HPP_

#include <cmath>
#include <cstdint>
#include <functional>

#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/diffusion/model.hpp"
#include "emotion/diffusion/schedule.hpp"
#include "emotion/diffusion/ve.hpp"
#include "emotion/event_repr/voxel.hpp"

namespace emotion {

struct SamplerConfig {
  int steps = 50;          // T
  int switch_step = 15;    // tau: replacement runs while t >= tau
  int prompt_frames = 4;   // s
  int frames = 5;          // F
  std::uint64_t seed = 0;
  bool renoise = false;    // ancestral (stochastic) chain instead of the ODE

  // ceil(0.3 T)
  static int default_switch_step(int steps) { return (3 * steps + 9) / 10; }
};

inline void validate(const SamplerConfig& c) {
  if (c.steps < 1) throw ParameterError("sampler needs T >= 1");
  if (c.switch_step < 1 || c.switch_step > c.steps + 1) {
    throw ParameterError("switch step tau must lie in [1, T + 1]");
  }
  if (c.frames < 1) throw ParameterError("sampler needs F >= 1");
  if (c.prompt_frames < 0 || c.prompt_frames > c.frames) {
    throw ParameterError("prompt frame count s must lie in [0, F]");
  }
}

// Random streams of one chain; independent so that guidance never perturbs
// the draws of the main latent.
inline constexpr std::uint64_t kStreamLatent = 0x7c01;
inline constexpr std::uint64_t kStreamPrompt = 0x7c02;
inline constexpr std::uint64_t kStreamRenoise = 0x7c03;

// Frames [0, s) from x_pm, frames [s, F) from x_rc.
inline VoxelSequence replace(const VoxelSequence& x_pm, const VoxelSequence& x_rc, int s) {
  if (s < 0 || s > x_rc.frames) throw ParameterError("replace: s must lie in [0, F]");
  if (x_pm.frames < s) throw DataError("replace: prompt latent has fewer than s frames");
  if (s > 0 && !x_pm.same_frame_shape(x_rc)) throw DataError("replace: frame shapes differ");
  VoxelSequence out = x_rc;
  std::copy_n(x_pm.values.begin(), static_cast<std::size_t>(s) * x_rc.frame_size(),
              out.values.begin());
  return out;
}

// One transition of the reverse chain, as seen by trajectory recorders.
// `state` is the latent fed to the estimator (after any replacement), `mean`
// the Gaussian mean of the next latent and `sigma_step` its noise scale
// (zero for deterministic steps).
struct StepRecord {
  int t;
  double sigma_t;
  double sigma_prev;
  double sigma_step;
  const VoxelSequence& state;
  const VoxelSequence& mu;
  const VoxelSequence& mean;
  const VoxelSequence& next;
};

using StepObserver = std::function<void(const StepRecord&)>;

namespace detail {

inline VoxelSequence noise_like(const VoxelSequence& shape, double scale, const RandomSource& rng) {
  VoxelSequence out = shape;
  out.scale.reset();
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = scale * rng.normal_at(i);
  return out;
}

// Reverse ODE update, optionally split into an ancestral move plus fresh noise.
template <CleanEstimator M>
VoxelSequence advance(M& model, const VoxelSequence& state, const VoxelSequence& prompt, int t,
                      const NoiseSchedule& schedule, bool renoise, const RandomSource& noise,
                      const StepObserver& observer) {
  const double sigma_t = schedule.sigma(t);
  const double sigma_prev = schedule.sigma(t - 1);
  const VoxelSequence mu = model.predict_clean(state, sigma_t, prompt);
  if (!mu.same_shape(state)) throw DataError("estimator changed the latent shape");
  VoxelSequence mean = state;
  double sigma_step = 0.0;
  if (renoise && sigma_prev > 0.0) {
    const AncestralStep split = ancestral_split(sigma_t, sigma_prev);
    reverse_step(state.values, mu.values, sigma_t, split.sigma_down, mean.values);
    sigma_step = split.sigma_up;
  } else {
    reverse_step(state.values, mu.values, sigma_t, sigma_prev, mean.values);
  }
  VoxelSequence next = mean;
  if (sigma_step > 0.0) {
    const RandomSource step_rng = noise.fork(static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < next.size(); ++i) next.values[i] += sigma_step * step_rng.normal_at(i);
  }
  if (observer) observer(StepRecord{t, sigma_t, sigma_prev, sigma_step, state, mu, mean, next});
  return next;
}

inline VoxelSequence latent_shape(const VoxelSequence& prompt, int frames) {
  VoxelSequence shape(frames, prompt.bins, prompt.height, prompt.width);
  shape.t0 = prompt.t0;
  shape.window_us = prompt.window_us;
  return shape;
}

inline void check_prompt(const VoxelSequence& prompt, const SamplerConfig& cfg,
                         const NoiseSchedule& schedule) {
  validate(cfg);
  if (cfg.steps != schedule.steps) throw ParameterError("sampler T does not match the schedule");
  if (prompt.frames != cfg.prompt_frames) {
    throw DataError("prompt has " + std::to_string(prompt.frames) + " frames, config says s = " +
                    std::to_string(cfg.prompt_frames));
  }
  if (prompt.bins < 1 || prompt.height < 1 || prompt.width < 1) {
    throw DataError("prompt must carry a nonempty frame shape");
  }
}

}  // namespace detail

// Multi-prompt reverse process. Both latents start as sigma_T-scaled Gaussian
// draws. While t >= tau the first s frames of the state are replaced by the
// VE-noised clean prompt X0_pm + sigma_t eps, with eps fixed per chain (the
// draw behind X_T^pm); afterwards the chain denoises on its own. Returns
// X_0^rc.
template <CleanEstimator M>
VoxelSequence sample(M& model, const VoxelSequence& prompt, const NoiseSchedule& schedule,
                     const SamplerConfig& cfg, const StepObserver& observer = {}) {
  detail::check_prompt(prompt, cfg, schedule);
  const double sigma_max = schedule.sigma(schedule.steps);
  const VoxelSequence shape = detail::latent_shape(prompt, cfg.frames);
  VoxelSequence x = detail::noise_like(shape, sigma_max, RandomSource(cfg.seed, kStreamLatent));
  const VoxelSequence eps_pm =
      detail::noise_like(prompt, 1.0, RandomSource(cfg.seed, kStreamPrompt));
  const RandomSource noise(cfg.seed, kStreamRenoise);
  const int s = cfg.prompt_frames;
  for (int t = schedule.steps; t >= 1; --t) {
    if (t >= cfg.switch_step && s > 0) {
      VoxelSequence x_pm = prompt;
      const double sigma_t = schedule.sigma(t);
      for (std::size_t i = 0; i < x_pm.size(); ++i) x_pm.values[i] += sigma_t * eps_pm.values[i];
      x = detail::advance(model, replace(x_pm, x, s), prompt, t, schedule, cfg.renoise, noise,
                          observer);
    } else {
      x = detail::advance(model, x, prompt, t, schedule, cfg.renoise, noise, observer);
    }
  }
  x.scale.reset();
  return x;
}

// Conventional reverse chain conditioned on the prompt, with no replacement.
template <CleanEstimator M>
VoxelSequence sample_unguided(M& model, const VoxelSequence& prompt, const NoiseSchedule& schedule,
                              const SamplerConfig& cfg, const StepObserver& observer = {}) {
  detail::check_prompt(prompt, cfg, schedule);
  VoxelSequence x = detail::noise_like(detail::latent_shape(prompt, cfg.frames),
                                       schedule.sigma(schedule.steps),
                                       RandomSource(cfg.seed, kStreamLatent));
  const RandomSource noise(cfg.seed, kStreamRenoise);
  for (int t = schedule.steps; t >= 1; --t) {
    x = detail::advance(model, x, prompt, t, schedule, cfg.renoise, noise, observer);
  }
  x.scale.reset();
  return x;
}

}  // namespace emotion

#endif  // EMOTION_SAMPLER_GUIDED_SAMPLER_HPP_
