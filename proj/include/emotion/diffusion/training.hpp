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

#ifndef EMOTION_DIFFUSION_TRAINING_HPP_
#define EMOTION_DIFFUSION_TRAINING_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/diffusion/adam.hpp"
#include "emotion/diffusion/model.hpp"
#include "emotion/diffusion/schedule.hpp"
#include "emotion/diffusion/ve.hpp"
#include "emotion/event_repr/voxel.hpp"
#include "emotion/event_sim/events.hpp"

namespace emotion {

struct TrainingExample {
  VoxelSequence prompt;  // clean conditioning frames
  VoxelSequence target;  // clean state x0
};

// Weighted denoising loss of one example at a fixed level and noise draw:
//   lambda(sigma) * mean((x0 - mu(x0 + sigma eps))^2).
// When `grad_scale` is nonzero, grad_scale * d(loss)/d(params) is accumulated
// into the model's gradient buffers.
template <TrainableEstimator M>
double denoising_loss(M& model, const TrainingExample& ex, double sigma, double sigma_data,
                      std::span<const double> eps, double grad_scale) {
  if (eps.size() != ex.target.size()) throw DataError("noise draw does not match target size");
  VoxelSequence x_t = ex.target;
  for (std::size_t i = 0; i < x_t.size(); ++i) x_t.values[i] += sigma * eps[i];
  const VoxelSequence mu = model.predict_clean(x_t, sigma, ex.prompt);
  const double weight = loss_weight(sigma, sigma_data);
  const double n = static_cast<double>(ex.target.size());
  double sq = 0.0;
  VoxelSequence grad = mu;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double r = ex.target.values[i] - mu.values[i];
    sq += r * r;
    grad.values[i] = -2.0 * weight * r / n * grad_scale;
  }
  const double loss = weight * sq / n;
  if (!std::isfinite(loss)) {
    throw NumericalError("non-finite training loss at sigma = " + std::to_string(sigma));
  }
  if (grad_scale != 0.0) model.backward(grad);
  return loss;
}

inline void check_example(const TrainingExample& ex) {
  if (ex.target.size() == 0) throw DataError("empty training target");
  if (ex.prompt.frames > 0 && !ex.prompt.same_frame_shape(ex.target)) {
    throw DataError("prompt " + shape_string(ex.prompt) + " not aligned with target " +
                    shape_string(ex.target));
  }
}

// Accumulates gradients of the batch-mean loss for one batch without
// stepping: each example draws t uniformly from {1..T} and fresh noise.
template <TrainableEstimator M>
double accumulate_batch(M& model, std::span<const TrainingExample> batch,
                        const NoiseSchedule& schedule, RandomSource& rng, double grad_scale) {
  double total = 0.0;
  for (const auto& ex : batch) {
    check_example(ex);
    const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(schedule.steps)));
    std::vector<double> eps(ex.target.size());
    for (double& e : eps) e = rng.normal();
    total += denoising_loss(model, ex, schedule.sigma(t), schedule.sigma_data, eps, grad_scale);
  }
  return total;
}

// One optimiser step on the batch-mean weighted denoising loss.
template <TrainableEstimator M>
double training_step(M& model, Adam& optimizer, std::span<const TrainingExample> batch,
                     const NoiseSchedule& schedule, RandomSource& rng) {
  if (batch.empty()) throw DataError("training batch is empty");
  model.zero_grad();
  const double scale = 1.0 / static_cast<double>(batch.size());
  const double loss = accumulate_batch(model, batch, schedule, rng, scale) * scale;
  auto grads = model.gradients();
  using G = typename decltype(grads)::element_type;
  optimizer.step(model.parameters(), std::span<const G>(grads.data(), grads.size()),
                 model.trainable_mask());
  return loss;
}

// Draws training clips from event streams with time-range augmentation: the
// window length is picked from `intervals_us`, the clip start is aligned to
// 1 ms, the clip is normalised sequence-wide, and a random-length prefix
// becomes the prompt.
struct ClipSamplerParams {
  int frames = 5;
  int bins = kDefaultBins;
  std::vector<std::uint32_t> intervals_us{10000, 20000, 40000};
  int min_prompt = 1;
  int max_prompt = 4;
};

class ClipSampler {
 public:
  ClipSampler(std::span<const EventStream> streams, ClipSamplerParams params)
      : streams_(streams), params_(std::move(params)) {
    if (streams_.empty()) throw ParameterError("clip sampler needs at least one stream");
    if (params_.intervals_us.empty()) throw ParameterError("no augmentation intervals");
    if (params_.min_prompt < 0 || params_.max_prompt < params_.min_prompt ||
        params_.max_prompt > params_.frames) {
      throw ParameterError("prompt length range must satisfy 0 <= min <= max <= frames");
    }
    for (const auto& s : streams_) {
      for (auto w : params_.intervals_us) {
        if (static_cast<std::uint64_t>(w) * params_.frames > s.duration_us) {
          throw ParameterError("stream shorter than the longest augmented clip");
        }
      }
    }
  }

  TrainingExample draw(RandomSource& rng) const {
    const auto& stream = streams_[rng.below(streams_.size())];
    const std::uint32_t interval = params_.intervals_us[rng.below(params_.intervals_us.size())];
    const std::uint64_t span = static_cast<std::uint64_t>(interval) * params_.frames;
    const std::uint64_t slots = (stream.duration_us - span) / 1000 + 1;
    const auto start = static_cast<std::int64_t>(rng.below(slots) * 1000);
    VoxelSequence clip = normalize_sequence(
        windowize(stream, interval, start, params_.frames, params_.bins));
    const int s = params_.min_prompt +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(
                      params_.max_prompt - params_.min_prompt + 1)));
    return {clip.slice(0, s), std::move(clip)};
  }

 private:
  std::span<const EventStream> streams_;
  ClipSamplerParams params_;
};

struct TrainLoopParams {
  int iterations = 5000;
  int batch = 8;
  int accumulation = 1;  // micro-batches per optimiser step
  std::uint64_t seed = 0;
};

// Runs `iterations` optimiser steps. Step i draws its clips and noise from
// stream i of the seed, so the run is reproducible bit for bit.
template <TrainableEstimator M>
void train_loop(M& model, Adam& optimizer, const ClipSampler& clips, const NoiseSchedule& schedule,
                const TrainLoopParams& p,
                const std::function<void(int, double)>& on_step = {}) {
  if (p.batch < 1 || p.accumulation < 1 || p.batch % p.accumulation != 0) {
    throw ParameterError("batch must be a positive multiple of the accumulation count");
  }
  const RandomSource root(p.seed, 0x7a41);
  const int micro = p.batch / p.accumulation;
  std::vector<TrainingExample> batch(static_cast<std::size_t>(micro));
  for (int it = 0; it < p.iterations; ++it) {
    RandomSource rng = root.fork(static_cast<std::uint64_t>(it));
    model.zero_grad();
    double loss = 0.0;
    const double scale = 1.0 / p.batch;
    for (int a = 0; a < p.accumulation; ++a) {
      for (auto& ex : batch) ex = clips.draw(rng);
      loss += accumulate_batch(model, std::span<const TrainingExample>(batch), schedule, rng, scale);
    }
    loss *= scale;
    auto grads = model.gradients();
    using G = typename decltype(grads)::element_type;
    optimizer.step(model.parameters(), std::span<const G>(grads.data(), grads.size()),
                   model.trainable_mask());
    if (on_step) on_step(it, loss);
  }
}

}  // namespace emotion

#endif  // EMOTION_DIFFUSION_TRAINING_HPP_
