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

#ifndef EMOTION_ALIGNMENT_ALIGN_HPP_
#define EMOTION_ALIGNMENT_ALIGN_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "emotion/alignment/pool.hpp"
#include "emotion/alignment/reward.hpp"
#include "emotion/alignment/trajectory.hpp"
#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/diffusion/adam.hpp"
#include "emotion/diffusion/model.hpp"
#include "emotion/diffusion/schedule.hpp"
#include "emotion/sampler/guided_sampler.hpp"

namespace emotion {

struct AlignConfig {
  std::size_t pool_size = 64;
  std::size_t batch = 64;
  int samples_per_prompt = 2;
  int iterations_per_refresh = 100;
  double clip = 0.2;
  double kl_weight = 0.1;
  double diversity_beta = 30.0;
  double learning_rate = 1e-5;
  double kl_ceiling = 5.0;  // nats per trajectory, checked after each epoch
  int workers = 1;
  bool deterministic = true;
  std::chrono::milliseconds pool_timeout{std::chrono::minutes(10)};
  std::uint64_t seed = 0;
  SamplerConfig sampler;
};

inline void validate(const AlignConfig& c) {
  if (c.pool_size < 1) throw ValidationError("pool_size", "must be at least 1");
  if (c.batch < 1 || c.batch > c.pool_size) {
    throw ValidationError("batch", "must lie in [1, pool_size]");
  }
  if (c.samples_per_prompt < 1) throw ValidationError("samples_per_prompt", "must be at least 1");
  if (c.iterations_per_refresh < 1) {
    throw ValidationError("iterations_per_refresh", "must be at least 1");
  }
  if (!(c.clip > 0.0 && c.clip < 1.0)) throw ValidationError("clip", "must lie in (0, 1)");
  if (!(c.kl_weight >= 0.0)) throw ValidationError("kl_weight", "must be non-negative");
  if (!(c.diversity_beta >= 0.0)) throw ValidationError("diversity_beta", "must be non-negative");
  if (!(c.learning_rate > 0.0)) throw ValidationError("learning_rate", "must be positive");
  if (!(c.kl_ceiling > 0.0)) throw ValidationError("kl_ceiling", "must be positive");
  if (c.workers < 1) throw ValidationError("workers", "must be at least 1");
  if (c.pool_timeout.count() <= 0) throw ValidationError("pool_timeout", "must be positive");
}

struct EpochMetrics {
  int epoch = 0;
  std::uint64_t stamp = 0;
  double mean_raw_reward = 0.0;
  double mean_standardized = 0.0;
  double mean_adjusted = 0.0;
  double loss = 0.0;            // last iteration
  double kl = 0.0;              // mean KL(ref || policy) per trajectory after the epoch
  double ratio_mean = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double clip_fraction = 0.0;   // share of scored steps whose ratio was clipped
  int iterations = 0;
  std::size_t discarded = 0;
};

inline constexpr std::uint64_t kStreamChains = 0xa1a0;
inline constexpr std::uint64_t kStreamBatches = 0xa1a1;

// Clipped importance-weighted policy optimization of a diffusion sampler
// against a frozen reference copy. Each epoch fills the pool under the
// reference, runs `iterations_per_refresh` updates on batches drawn from it,
// then copies the policy into the reference and invalidates the pool.
template <TrainableEstimator M, typename RewardModel>
class Aligner {
 public:
  Aligner(M policy, std::vector<VoxelSequence> prompts, RewardModel reward, NoiseSchedule schedule,
          AlignConfig cfg)
      : policy_(std::move(policy)),
        prompts_(std::move(prompts)),
        reward_(std::move(reward)),
        schedule_(std::move(schedule)),
        cfg_(cfg),
        optimizer_(policy_.parameter_count(), AdamParams{cfg.learning_rate, 0.9, 0.999, 1e-8}),
        pool_(cfg.pool_size) {
    validate(cfg_);
    if (prompts_.empty()) throw ParameterError("alignment needs at least one prompt");
    if (cfg_.sampler.steps != schedule_.steps) {
      throw ValidationError("sampler.steps", "does not match the schedule");
    }
    pool_.advance(stamp_, std::make_shared<const M>(policy_));
    if (!cfg_.deterministic) {
      for (int i = 0; i < cfg_.workers; ++i) workers_.emplace_back([this] { produce(); });
    }
  }

  Aligner(const Aligner&) = delete;
  Aligner& operator=(const Aligner&) = delete;

  ~Aligner() {
    pool_.close();
    for (auto& w : workers_) w.join();
  }

  const M& policy() const noexcept { return policy_; }
  std::uint64_t stamp() const noexcept { return stamp_; }
  const AlignConfig& config() const noexcept { return cfg_; }
  const TrajectoryPool<M>& pool() const noexcept { return pool_; }

  // Deterministic function of (seed, stamp, index) and the reference weights.
  Trajectory generate(M& reference, std::uint64_t stamp, std::uint64_t index) const {
    const std::size_t per_generation =
        std::max<std::size_t>(1, cfg_.pool_size / static_cast<std::size_t>(cfg_.samples_per_prompt));
    const std::size_t prompt_index =
        (stamp * per_generation + index / static_cast<std::uint64_t>(cfg_.samples_per_prompt)) %
        prompts_.size();
    const VoxelSequence& prompt = prompts_[prompt_index];
    SamplerConfig sc = cfg_.sampler;
    sc.prompt_frames = prompt.frames;
    sc.seed = RandomSource(cfg_.seed, kStreamChains).fork(stamp).bits_at(index);
    Trajectory t = record_trajectory(reference, prompt, schedule_, sc);
    t.prompt_index = prompt_index;
    t.index = index;
    t.stamp = stamp;
    return t;
  }

  EpochMetrics epoch() {
    if (cfg_.deterministic) {
      while (auto job = pool_.try_claim()) {
        M local = *job->reference;
        pool_.submit(generate(local, job->stamp, job->index));
      }
    }
    std::vector<Trajectory> trajs = pool_.take_full(cfg_.pool_timeout);
    std::vector<RewardRecord> rewards = reward_(std::span<const Trajectory>(trajs));
    if (rewards.size() != trajs.size()) throw DataError("reward model returned the wrong count");
    normalize_rewards(rewards, cfg_.diversity_beta);
    check_standardized(rewards);

    EpochMetrics m;
    m.epoch = epoch_;
    m.stamp = stamp_;
    for (const auto& r : rewards) {
      m.mean_raw_reward += r.raw;
      m.mean_standardized += r.standardized;
      m.mean_adjusted += r.adjusted;
    }
    const double n = static_cast<double>(rewards.size());
    m.mean_raw_reward /= n;
    m.mean_standardized /= n;
    m.mean_adjusted /= n;

    RatioStats stats;
    const RandomSource batches = RandomSource(cfg_.seed, kStreamBatches).fork(stamp_);
    for (int it = 0; it < cfg_.iterations_per_refresh; ++it) {
      const auto picked = pick_batch(trajs.size(), batches.fork(static_cast<std::uint64_t>(it)));
      m.loss = update(trajs, rewards, picked, stats);
    }
    m.iterations = cfg_.iterations_per_refresh;
    m.ratio_mean = stats.count ? stats.sum / static_cast<double>(stats.count) : 1.0;
    m.ratio_min = stats.count ? stats.min : 1.0;
    m.ratio_max = stats.count ? stats.max : 1.0;
    m.clip_fraction =
        stats.steps ? static_cast<double>(stats.clipped) / static_cast<double>(stats.steps) : 0.0;

    double kl = 0.0;
    for (const auto& t : trajs) kl += kl_regularizer(policy_, t, prompts_);
    m.kl = kl / n;

    ++stamp_;
    ++epoch_;
    pool_.advance(stamp_, std::make_shared<const M>(policy_));
    m.discarded = pool_.discarded();
    return m;
  }

 private:
  struct RatioStats {
    double sum = 0.0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    std::size_t steps = 0;
    std::size_t clipped = 0;
  };

  void produce() {
    try {
      while (auto job = pool_.claim()) {
        M local = *job->reference;
        pool_.submit(generate(local, job->stamp, job->index));
      }
    } catch (...) {
      pool_.fail(std::current_exception());
    }
  }

  static void check_standardized(std::span<const RewardRecord> rewards) {
    bool all_zero = true;
    for (const auto& r : rewards) all_zero = all_zero && r.standardized == 0.0;
    if (all_zero) return;
    const auto [mean, var] = standardized_moments(rewards);
    if (std::abs(mean) >= 1e-9 || std::abs(var - 1.0) >= 1e-9) {
      throw NumericalError("standardized rewards have mean " + std::to_string(mean) +
                           " and variance " + std::to_string(var));
    }
  }

  std::vector<std::size_t> pick_batch(std::size_t n, const RandomSource& rng) const {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (cfg_.batch >= n) return idx;
    for (std::size_t i = 0; i < cfg_.batch; ++i) {
      const std::size_t span = n - i;
      const auto j = i + static_cast<std::size_t>(rng.uniform_at(i) * static_cast<double>(span));
      std::swap(idx[i], idx[std::min(j, n - 1)]);
    }
    idx.resize(cfg_.batch);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  // One optimizer step on L = -mean_b(r_b A_b) + kl_weight * mean_b(KL_b).
  double update(const std::vector<Trajectory>& trajs, const std::vector<RewardRecord>& rewards,
                const std::vector<std::size_t>& picked, RatioStats& stats) {
    policy_.zero_grad();
    const double inv_b = 1.0 / static_cast<double>(picked.size());
    double loss = 0.0;
    for (const std::size_t b : picked) {
      const Trajectory& tr = trajs[b];
      ImportanceTerm term = importance_term(policy_, tr, prompts_, stamp_, cfg_.clip);
      const double adv = rewards[b].adjusted;
      loss += inv_b * (-term.ratio * adv + cfg_.kl_weight * kl_regularizer(tr, term.mu));
      stats.sum += term.ratio;
      stats.min = std::min(stats.min, term.ratio);
      stats.max = std::max(stats.max, term.ratio);
      ++stats.count;
      const VoxelSequence& prompt = prompts_[tr.prompt_index];
      for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        const TrajectoryStep& step = tr.steps[i];
        if (!step.scored()) continue;
        ++stats.steps;
        const bool clipped = term.clipped[i] != 0;
        if (clipped) ++stats.clipped;
        const double inv_var = 1.0 / (step.sigma_step * step.sigma_step);
        const double g_ratio = clipped ? 0.0 : -adv * inv_b * term.ratio * inv_var;
        const double g_kl = cfg_.kl_weight * inv_b * inv_var;
        if (g_ratio == 0.0 && g_kl == 0.0) continue;
        VoxelSequence grad = step.state;
        const VoxelSequence& mu = term.mu[i];
        for (std::size_t k = 0; k < grad.size(); ++k) {
          const double s = step.state.values[k];
          const double m = s + step.shrink * (mu.values[k] - s);
          const double m_ref = s + step.shrink * (step.mu_ref.values[k] - s);
          const double dm = g_ratio * (step.next.values[k] - m) + g_kl * (m - m_ref);
          grad.values[k] = step.shrink * dm;
        }
        policy_.predict_clean(step.state, step.sigma_t, prompt);
        policy_.backward(grad);
      }
    }
    auto grads = policy_.gradients();
    using G = typename decltype(grads)::element_type;
    optimizer_.step(policy_.parameters(), std::span<const G>(grads.data(), grads.size()),
                    policy_.trainable_mask());
    return loss;
  }

  M policy_;
  std::vector<VoxelSequence> prompts_;
  RewardModel reward_;
  NoiseSchedule schedule_;
  AlignConfig cfg_;
  Adam optimizer_;
  TrajectoryPool<M> pool_;
  std::uint64_t stamp_ = 0;
  int epoch_ = 0;
  std::vector<std::thread> workers_;
};

}  // namespace emotion

#endif  // EMOTION_ALIGNMENT_ALIGN_HPP_
