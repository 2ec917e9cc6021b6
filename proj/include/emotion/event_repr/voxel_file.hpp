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

#ifndef EMOTION_EVENT_REPR_VOXEL_FILE_HPP_
#define EMOTION_EVENT_REPR_VOXEL_FILE_HPP_

#include <cmath>
#include <filesystem>
#include <limits>

#include "emotion/core/binary_io.hpp"
#include "emotion/event_repr/voxel.hpp"

namespace emotion {

// VOX1: "VOX1", u16 B, u16 H, u16 W, u16 frames, f32 scale (NaN when
// absent), u32 window_us, then f32 values frame-major, bin-major, row-major.
// All little-endian. The sequence start time is not stored.
inline io::Bytes encode_vox1(const VoxelSequence& s) {
  if (s.bins <= 0 || s.bins > 65535 || s.height <= 0 || s.height > 65535 || s.width <= 0 ||
      s.width > 65535 || s.frames < 0 || s.frames > 65535) {
    throw DataError("VOX1 dimensions must fit in u16");
  }
  if (s.values.size() != static_cast<std::size_t>(s.frames) * s.frame_size()) {
    throw DataError("voxel sequence value count does not match its shape");
  }
  io::ByteWriter w;
  w.put_magic("VOX1");
  w.put(static_cast<std::uint16_t>(s.bins));
  w.put(static_cast<std::uint16_t>(s.height));
  w.put(static_cast<std::uint16_t>(s.width));
  w.put(static_cast<std::uint16_t>(s.frames));
  w.put(s.scale ? static_cast<float>(*s.scale) : std::numeric_limits<float>::quiet_NaN());
  w.put(s.window_us);
  for (double v : s.values) w.put(static_cast<float>(v));
  return w.take();
}

inline VoxelSequence decode_vox1(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  r.expect_magic("VOX1");
  VoxelSequence s;
  s.bins = r.get<std::uint16_t>();
  s.height = r.get<std::uint16_t>();
  s.width = r.get<std::uint16_t>();
  s.frames = r.get<std::uint16_t>();
  if (s.bins == 0 || s.height == 0 || s.width == 0) {
    throw FormatError("zero voxel dimension", 4);
  }
  const float scale = r.get<float>();
  if (!std::isnan(scale)) {
    if (!(scale > 0.0f)) throw FormatError("scale must be positive or NaN", 12);
    s.scale = scale;
  }
  s.window_us = r.get<std::uint32_t>();
  const std::size_t n = static_cast<std::size_t>(s.frames) * s.frame_size();
  if (r.remaining() != n * 4) throw FormatError("payload size does not match header", r.offset());
  s.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float v = r.get<float>();
    if (!std::isfinite(v)) throw FormatError("non-finite voxel value", r.offset() - 4);
    s.values[i] = v;
  }
  return s;
}

inline void write_vox1(const std::filesystem::path& path, const VoxelSequence& s) {
  io::write_file(path, encode_vox1(s));
}

inline VoxelSequence read_vox1(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return decode_vox1(bytes);
}

}  // namespace emotion

#endif  // EMOTION_EVENT_REPR_VOXEL_FILE_HPP_
