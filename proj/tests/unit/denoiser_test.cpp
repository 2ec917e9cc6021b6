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

#include <cmath>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/denoiser/checkpoint.hpp"
#include "emotion/denoiser/conv_denoiser.hpp"
#include "emotion/denoiser/precondition.hpp"
#include "emotion/diffusion/adam.hpp"
#include "support/oracles.hpp"

namespace emotion {
namespace {

VoxelSequence random_seq(int frames, int bins, int h, int w, std::uint64_t seed) {
  VoxelSequence s(frames, bins, h, w);
  RandomSource rng(seed, 3);
  for (double& v : s.values) v = rng.uniform(-1.0, 1.0);
  return s;
}

VoxelSequence roll(const VoxelSequence& s, int dy, int dx) {
  VoxelSequence out = s;
  for (int f = 0; f < s.frames; ++f) {
    for (int b = 0; b < s.bins; ++b) {
      for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
          out.at(f, b, (y + dy) % s.height, (x + dx) % s.width) = s.at(f, b, y, x);
        }
      }
    }
  }
  return out;
}

const DenoiserArch kTiny{2, 2, 3, 3, 3};

TEST(Precondition, Limits) {
  const Preconditioning p = precondition(0.5, 0.5);
  EXPECT_DOUBLE_EQ(p.c_skip, 0.5);
  EXPECT_DOUBLE_EQ(p.c_out, 0.25 / std::sqrt(0.5));
  const Preconditioning small = precondition(1e-9, 0.5);
  EXPECT_NEAR(small.c_skip, 1.0, 1e-15);
  EXPECT_NEAR(small.c_out, 0.0, 1e-8);
}

TEST(ConvDenoiser, ParameterCountFollowsArchitecture) {
  const DenoiserArch a;
  const std::size_t in = 2 * 15 + 5 + 1;
  const std::size_t expect = (9 * in * 32 + 32) + 2 * (9 * 32 * 32 + 32) + (9 * 32 * 30 + 30);
  EXPECT_EQ(a.parameter_count(), expect);
  EXPECT_EQ(ConvDenoiser<float>(a, 0.5, 1).parameter_count(), expect);
  EXPECT_EQ(ConvDenoiser<float>(a, 0.5, 2).parameter_count(), expect);
}

TEST(ConvDenoiser, ZeroNetworkIsSkipPath) {
  ConvDenoiser<double> m(kTiny, 0.5, 4);
  for (double& p : m.parameters()) p = 0.0;
  const VoxelSequence x = random_seq(2, 2, 4, 5, 1), prompt = random_seq(1, 2, 4, 5, 2);
  const double sigma = 0.7;
  const VoxelSequence mu = m.predict_clean(x, sigma, prompt);
  const double c_skip = 0.25 / (0.49 + 0.25);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(mu.values[i], c_skip * x.values[i], 1e-15);
}

TEST(ConvDenoiser, GateScalesSkipPath) {
  ConvDenoiser<double> m(kTiny, 0.5, 4);
  for (double& p : m.parameters()) p = 0.0;
  const int last = kTiny.layers - 1;
  const std::size_t gate_bias = m.layer_range(last).second - kTiny.out_channels();
  const VoxelSequence x = random_seq(2, 2, 4, 5, 1), prompt = random_seq(1, 2, 4, 5, 2);
  for (double g : {0.25, 1.0}) {
    for (std::size_t i = gate_bias; i < m.layer_range(last).second; ++i) m.parameters()[i] = g;
    for (double sigma : {0.05, 0.7, 4.0}) {
      const VoxelSequence mu = m.predict_clean(x, sigma, prompt);
      const double c_skip = 0.25 / (sigma * sigma + 0.25);
      for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(mu.values[i], (1.0 - g) * c_skip * x.values[i], 1e-15);
      }
    }
  }
}

TEST(ConvDenoiser, SmallSigmaReturnsInput) {
  ConvDenoiser<double> m(kTiny, 0.5, 4);
  const VoxelSequence x = random_seq(2, 2, 4, 5, 1), prompt = random_seq(2, 2, 4, 5, 2);
  const VoxelSequence mu = m.predict_clean(x, 1e-8, prompt);
  EXPECT_TRUE(mu.same_shape(x));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(mu.values[i], x.values[i], 1e-6);
}

TEST(ConvDenoiser, ShapeAndStateErrors) {
  ConvDenoiser<double> m(kTiny, 0.5, 4);
  const VoxelSequence x = random_seq(2, 2, 4, 5, 1);
  EXPECT_THROW(m.backward(x), StateError);
  EXPECT_THROW(m.predict_clean(random_seq(3, 2, 4, 5, 1), 1.0, VoxelSequence{}), DataError);
  EXPECT_THROW(m.predict_clean(x, 1.0, random_seq(1, 2, 4, 4, 1)), DataError);
  EXPECT_THROW(m.predict_clean(x, 0.0, VoxelSequence{}), ParameterError);
  m.predict_clean(x, 1.0, VoxelSequence{});
  EXPECT_THROW(m.backward(random_seq(2, 2, 5, 5, 1)), DataError);
}

TEST(ConvDenoiser, ZeroUpstreamGradient) {
  ConvDenoiser<double> m(kTiny, 0.5, 4);
  const VoxelSequence x = random_seq(2, 2, 4, 5, 1);
  const VoxelSequence mu = m.predict_clean(x, 1.0, random_seq(1, 2, 4, 5, 2));
  m.zero_grad();
  m.backward(VoxelSequence(2, 2, 4, 5));
  for (double g : m.gradients()) EXPECT_EQ(g, 0.0);
  (void)mu;
}

class GradCheck : public ::testing::TestWithParam<DenoiserArch> {};

TEST_P(GradCheck, AnalyticMatchesCentralDifference) {
  const DenoiserArch arch = GetParam();
  ConvDenoiser<double> m(arch, 0.5, 17);
  // Nonzero biases so every activation regime is exercised.
  RandomSource rng(5, 9);
  for (double& p : m.parameters()) p += 0.1 * rng.uniform(-1.0, 1.0);
  const VoxelSequence x = random_seq(arch.frames, arch.bins, 4, 5, 6);
  const VoxelSequence prompt = random_seq(arch.frames - 1, arch.bins, 4, 5, 7);
  const VoxelSequence g = random_seq(arch.frames, arch.bins, 4, 5, 8);
  const double sigma = 0.9;
  const auto objective = [&] {
    const VoxelSequence mu = m.predict_clean(x, sigma, prompt);
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += g.values[i] * mu.values[i];
    return s;
  };
  objective();
  m.zero_grad();
  m.backward(g);
  const std::vector<double> analytic(m.gradients().begin(), m.gradients().end());
  std::vector<double> w(m.parameters().begin(), m.parameters().end());
  const auto load = [&] { std::copy(w.begin(), w.end(), m.parameters().begin()); };
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double fd = testing::central_difference(
        [&] {
          load();
          return objective();
        },
        w, i, 1e-4);
    ASSERT_LT(std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i])), 1e-4)
        << "parameter " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Architectures, GradCheck,
                         ::testing::Values(DenoiserArch{2, 2, 3, 3, 3}, DenoiserArch{3, 1, 4, 2, 3},
                                           DenoiserArch{2, 1, 2, 4, 1}, DenoiserArch{1, 3, 3, 2, 3}));

TEST(ConvDenoiser, TranslationEquivariance) {
  ConvDenoiser<double> m(kTiny, 0.5, 23);
  const VoxelSequence x = random_seq(2, 2, 6, 7, 1), prompt = random_seq(1, 2, 6, 7, 2);
  const VoxelSequence base = roll(m.predict_clean(x, 0.6, prompt), 2, 3);
  const VoxelSequence shifted = m.predict_clean(roll(x, 2, 3), 0.6, roll(prompt, 2, 3));
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(base.values[i], shifted.values[i], 1e-12);
}

TEST(ConvDenoiser, FrozenLayerIsNeverUpdated) {
  ConvDenoiser<double> m(kTiny, 0.5, 4);
  m.set_layer_trainable(1, false);
  EXPECT_FALSE(m.layer_trainable(1));
  EXPECT_TRUE(m.layer_trainable(0));
  const auto [first, last] = m.layer_range(1);
  const std::vector<double> before(m.parameters().begin(), m.parameters().end());
  Adam opt(m.parameter_count(), {.learning_rate = 0.05});
  for (int it = 0; it < 3; ++it) {
    m.zero_grad();
    m.predict_clean(random_seq(2, 2, 4, 5, it), 1.0, VoxelSequence{});
    m.backward(random_seq(2, 2, 4, 5, 100 + it));
    for (std::size_t i = first; i < last; ++i) EXPECT_EQ(m.gradients()[i], 0.0);
    opt.step(m.parameters(), std::span<const double>(m.gradients()), m.trainable_mask());
  }
  bool moved = false;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (i >= first && i < last) {
      EXPECT_EQ(m.parameters()[i], before[i]);
    } else {
      moved = moved || m.parameters()[i] != before[i];
    }
  }
  EXPECT_TRUE(moved);
  EXPECT_THROW(m.set_layer_trainable(3, false), RangeError);
}

TEST(Checkpoint, RoundTrip) {
  ConvDenoiser<float> m(kTiny, 0.5, 31);
  m.set_layer_trainable(2, false);
  const ScheduleParams sched{20, 0.02, 10.0, 0.5};
  const Checkpoint c = make_checkpoint(m, sched, 123, 31);
  const io::Bytes bytes = encode_ckpt1(c);
  const Checkpoint back = decode_ckpt1(bytes);
  EXPECT_EQ(back.arch, kTiny);
  EXPECT_EQ(back.step, 123u);
  EXPECT_EQ(back.schedule.steps, 20);
  EXPECT_EQ(back.params, c.params);
  EXPECT_EQ(encode_ckpt1(back), bytes);
  ConvDenoiser<float> loaded = load_model(back);
  EXPECT_FALSE(loaded.layer_trainable(2));
  const VoxelSequence x = random_seq(2, 2, 4, 5, 1);
  EXPECT_EQ(loaded.predict_clean(x, 0.3, VoxelSequence{}).values,
            m.predict_clean(x, 0.3, VoxelSequence{}).values);
}

TEST(Checkpoint, CorruptionIsDetected) {
  ConvDenoiser<float> m(kTiny, 0.5, 31);
  const io::Bytes bytes = encode_ckpt1(make_checkpoint(m, ScheduleParams{}, 0, 31));
  io::Bytes flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_THROW(decode_ckpt1(flipped), FormatError);
  EXPECT_THROW(decode_ckpt1(io::Bytes(bytes.begin(), bytes.begin() + 6)), FormatError);
}

}  // namespace
}  // namespace emotion
