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

#include <gtest/gtest.h>

#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/denoiser/conv_denoiser.hpp"
#include "emotion/diffusion/oracle.hpp"
#include "emotion/diffusion/schedule.hpp"
#include "emotion/sampler/guided_sampler.hpp"

namespace emotion {
namespace {

VoxelSequence labelled(int frames, double base) {
  VoxelSequence s(frames, 2, 3, 3);
  for (std::size_t i = 0; i < s.size(); ++i) s.values[i] = base + static_cast<double>(i);
  return s;
}

VoxelSequence random_prompt(int frames, std::uint64_t seed) {
  VoxelSequence s(frames, 2, 4, 4);
  RandomSource rng(seed, 0);
  for (double& v : s.values) v = rng.uniform(-1.0, 1.0);
  return s;
}

SamplerConfig config(int steps, int tau, int s, int f, std::uint64_t seed) {
  SamplerConfig c;
  c.steps = steps;
  c.switch_step = tau;
  c.prompt_frames = s;
  c.frames = f;
  c.seed = seed;
  return c;
}

TEST(Replace, Examples) {
  const VoxelSequence pm = labelled(5, 1000.0), rc = labelled(5, 0.0);
  EXPECT_EQ(replace(pm, rc, 0).values, rc.values);
  EXPECT_EQ(replace(pm, rc, 5).values, pm.values);
  const VoxelSequence mixed = replace(pm.slice(0, 2), rc, 2);
  for (int f = 0; f < 5; ++f) {
    const auto want = f < 2 ? pm.frame(f) : rc.frame(f);
    const auto got = mixed.frame(f);
    EXPECT_TRUE(std::equal(got.begin(), got.end(), want.begin())) << "frame " << f;
  }
  EXPECT_THROW(replace(pm, rc, 6), ParameterError);
  EXPECT_THROW(replace(pm.slice(0, 1), rc, 2), DataError);
}

TEST(Config, DefaultSwitchStepAndValidation) {
  EXPECT_EQ(SamplerConfig::default_switch_step(50), 15);
  EXPECT_EQ(SamplerConfig::default_switch_step(10), 3);
  EXPECT_EQ(SamplerConfig::default_switch_step(7), 3);
  EXPECT_THROW(validate(config(10, 0, 1, 5, 0)), ParameterError);
  EXPECT_THROW(validate(config(10, 12, 1, 5, 0)), ParameterError);
  EXPECT_THROW(validate(config(10, 3, 6, 5, 0)), ParameterError);
  EXPECT_NO_THROW(validate(config(10, 11, 5, 5, 0)));
}

TEST(Sample, ScheduleMismatchAndPromptErrors) {
  GaussianPosteriorOracle o{0.0, 0.5};
  const NoiseSchedule s = make_schedule(10, 0.02, 10.0, 0.5);
  EXPECT_THROW(sample(o, random_prompt(2, 1), s, config(12, 4, 2, 5, 0)), ParameterError);
  EXPECT_THROW(sample(o, random_prompt(3, 1), s, config(10, 4, 2, 5, 0)), DataError);
}

TEST(Sample, DegenerateGuidanceEqualsUnguided) {
  ConvDenoiser<double> m(DenoiserArch{5, 2, 4, 3, 3}, 0.5, 3);
  const NoiseSchedule s = make_schedule(8, 0.02, 10.0, 0.5);
  const VoxelSequence prompt = random_prompt(4, 2);
  for (bool renoise : {false, true}) {
    SamplerConfig c = config(8, 9, 4, 5, 77);
    c.renoise = renoise;
    EXPECT_EQ(sample(m, prompt, s, c).values, sample_unguided(m, prompt, s, c).values);
  }
}

TEST(Sample, SeedDeterminism) {
  ConvDenoiser<double> m(DenoiserArch{5, 2, 4, 3, 3}, 0.5, 3);
  const NoiseSchedule s = make_schedule(8, 0.02, 10.0, 0.5);
  const VoxelSequence prompt = random_prompt(2, 2);
  SamplerConfig c = config(8, 3, 2, 5, 41);
  c.renoise = true;
  const VoxelSequence a = sample(m, prompt, s, c), b = sample(m, prompt, s, c);
  EXPECT_EQ(a.values, b.values);
  c.seed = 42;
  EXPECT_NE(sample(m, prompt, s, c).values, a.values);
}

TEST(Sample, FullPromptReplacementReturnsPrompt) {
  GaussianPosteriorOracle o{0.0, 0.5};
  const VoxelSequence prompt = random_prompt(5, 8);
  double last = 1e9;
  for (double smin : {1e-2, 1e-4, 1e-6}) {
    const NoiseSchedule s = make_schedule(30, smin, 10.0, 0.5);
    const VoxelSequence out = sample(o, prompt, s, config(30, 1, 5, 5, 5));
    double err = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) err = std::max(err, std::abs(out.values[i] - prompt.values[i]));
    EXPECT_LT(err, last);
    last = err;
  }
  EXPECT_LT(last, 1e-4);
}

TEST(Sample, GuidanceLeavesLaterFramesOfAFrameLocalModel) {
  // The elementwise oracle treats every frame independently.
  GaussianPosteriorOracle o{0.1, 0.4};
  const NoiseSchedule s = make_schedule(12, 0.02, 10.0, 0.5);
  const VoxelSequence prompt = random_prompt(2, 4);
  const SamplerConfig c = config(12, 4, 2, 5, 19);
  const VoxelSequence g = sample(o, prompt, s, c), u = sample_unguided(o, prompt, s, c);
  for (int f = 2; f < 5; ++f) {
    EXPECT_TRUE(std::equal(g.frame(f).begin(), g.frame(f).end(), u.frame(f).begin()));
  }
  EXPECT_FALSE(std::equal(g.frame(0).begin(), g.frame(0).end(), u.frame(0).begin()));
}

TEST(Sample, PromptFidelityImprovesWithReplacementSteps) {
  GaussianPosteriorOracle o{0.0, 0.5};
  const int steps = 20, s_frames = 2;
  const NoiseSchedule s = make_schedule(steps, 0.02, 10.0, 0.5);
  double previous = 1e9;
  for (int tau = steps + 1; tau >= 1; tau -= 4) {
    double dist = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const VoxelSequence prompt = random_prompt(s_frames, 100 + seed);
      const VoxelSequence out = sample(o, prompt, s, config(steps, tau, s_frames, 4, seed));
      for (std::size_t i = 0; i < prompt.size(); ++i) {
        const double d = out.values[i] - prompt.values[i];
        dist += d * d / 20.0;
      }
    }
    EXPECT_LE(dist, previous + 1e-12) << "tau " << tau;
    previous = dist;
  }
}

TEST(Sample, ObserverSeesEveryStep) {
  GaussianPosteriorOracle o{0.0, 0.5};
  const NoiseSchedule s = make_schedule(6, 0.02, 10.0, 0.5);
  SamplerConfig c = config(6, 3, 1, 3, 2);
  c.renoise = true;
  std::vector<int> ts;
  std::vector<double> step_sigmas;
  sample(o, random_prompt(1, 1), s, c, [&](const StepRecord& r) {
    ts.push_back(r.t);
    step_sigmas.push_back(r.sigma_step);
  });
  EXPECT_EQ(ts, (std::vector<int>{6, 5, 4, 3, 2, 1}));
  for (std::size_t i = 0; i + 1 < step_sigmas.size(); ++i) EXPECT_GT(step_sigmas[i], 0.0);
  EXPECT_EQ(step_sigmas.back(), 0.0);
}

}  // namespace
}  // namespace emotion
