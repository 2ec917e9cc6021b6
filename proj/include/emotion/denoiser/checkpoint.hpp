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

#ifndef EMOTION_DENOISER_CHECKPOINT_HPP_
#define EMOTION_DENOISER_CHECKPOINT_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "emotion/core/binary_io.hpp"
#include "emotion/denoiser/conv_denoiser.hpp"
#include "emotion/diffusion/schedule.hpp"

namespace emotion {

inline constexpr std::uint32_t kCheckpointSchema = 1;

struct Checkpoint {
  DenoiserArch arch;
  ScheduleParams schedule;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> trainable;  // one flag per layer
  std::vector<float> params;
};

// CKPT1 layout (little-endian):
//   "CKPT" u32 schema, u64 parameter count,
//   u32 T, f64 sigma_min, f64 sigma_max, f64 sigma_data,
//   u64 training step, u64 seed,
//   u16 frames, u16 bins, u16 hidden, u16 layers, u16 kernel,
//   u8 trainable flag per layer,
//   f32 parameters in declaration order,
//   u64 FNV-1a checksum of every preceding byte.
inline io::Bytes encode_ckpt1(const Checkpoint& c) {
  if (c.params.size() != c.arch.parameter_count()) {
    throw DataError("checkpoint parameter count does not match its architecture");
  }
  if (c.trainable.size() != static_cast<std::size_t>(c.arch.layers)) {
    throw DataError("checkpoint needs one trainable flag per layer");
  }
  io::ByteWriter w;
  w.put_magic("CKPT");
  w.put(kCheckpointSchema);
  w.put(static_cast<std::uint64_t>(c.params.size()));
  w.put(static_cast<std::uint32_t>(c.schedule.steps));
  w.put(c.schedule.sigma_min);
  w.put(c.schedule.sigma_max);
  w.put(c.schedule.sigma_data);
  w.put(c.step);
  w.put(c.seed);
  for (int v : {c.arch.frames, c.arch.bins, c.arch.hidden, c.arch.layers, c.arch.kernel}) {
    w.put(static_cast<std::uint16_t>(v));
  }
  for (std::uint8_t t : c.trainable) w.put(static_cast<std::uint8_t>(t ? 1 : 0));
  for (float p : c.params) w.put(p);
  const std::uint64_t sum = io::fnv1a64(w.bytes());
  w.put(sum);
  return w.take();
}

inline Checkpoint decode_ckpt1(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw FormatError("checkpoint too short", 0);
  const std::size_t body = bytes.size() - 8;
  io::ByteReader tail(bytes.subspan(body));
  if (tail.get<std::uint64_t>() != io::fnv1a64(bytes.first(body))) {
    throw FormatError("checksum mismatch", body);
  }
  io::ByteReader r(bytes.first(body));
  r.expect_magic("CKPT");
  if (r.get<std::uint32_t>() != kCheckpointSchema) throw FormatError("unsupported schema", 4);
  const auto count = r.get<std::uint64_t>();
  Checkpoint c;
  c.schedule.steps = static_cast<int>(r.get<std::uint32_t>());
  c.schedule.sigma_min = r.get<double>();
  c.schedule.sigma_max = r.get<double>();
  c.schedule.sigma_data = r.get<double>();
  c.step = r.get<std::uint64_t>();
  c.seed = r.get<std::uint64_t>();
  const std::size_t arch_at = r.offset();
  c.arch.frames = r.get<std::uint16_t>();
  c.arch.bins = r.get<std::uint16_t>();
  c.arch.hidden = r.get<std::uint16_t>();
  c.arch.layers = r.get<std::uint16_t>();
  c.arch.kernel = r.get<std::uint16_t>();
  try {
    c.arch.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid architecture: ") + e.what(), arch_at);
  }
  if (count != c.arch.parameter_count()) {
    throw FormatError("parameter count does not match architecture", 8);
  }
  for (int l = 0; l < c.arch.layers; ++l) c.trainable.push_back(r.get<std::uint8_t>());
  if (r.remaining() != count * 4) throw FormatError("parameter payload size mismatch", r.offset());
  c.params.resize(count);
  for (auto& p : c.params) {
    p = r.get<float>();
    if (!std::isfinite(p)) throw FormatError("non-finite parameter", r.offset() - 4);
  }
  return c;
}

template <typename Scalar>
Checkpoint make_checkpoint(const ConvDenoiser<Scalar>& model, const ScheduleParams& schedule,
                           std::uint64_t step, std::uint64_t seed) {
  Checkpoint c{model.arch(), schedule, step, seed, {}, {}};
  for (int l = 0; l < model.arch().layers; ++l) c.trainable.push_back(model.layer_trainable(l));
  c.params.reserve(model.parameter_count());
  for (Scalar p : model.parameters()) c.params.push_back(static_cast<float>(p));
  return c;
}

template <typename Scalar = float>
ConvDenoiser<Scalar> load_model(const Checkpoint& c) {
  ConvDenoiser<Scalar> model(c.arch, c.schedule.sigma_data, c.seed);
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i] = static_cast<Scalar>(c.params[i]);
  for (int l = 0; l < c.arch.layers; ++l) {
    model.set_layer_trainable(l, c.trainable[static_cast<std::size_t>(l)] != 0);
  }
  return model;
}

inline void write_ckpt1(const std::filesystem::path& path, const Checkpoint& c) {
  io::write_file(path, encode_ckpt1(c));
}

inline Checkpoint read_ckpt1(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return decode_ckpt1(bytes);
}

}  // namespace emotion

#endif  // EMOTION_DENOISER_CHECKPOINT_HPP_
