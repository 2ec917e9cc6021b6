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

#ifndef EMOTION_EVENT_SIM_EVENT_FILE_HPP_
#define EMOTION_EVENT_SIM_EVENT_FILE_HPP_

#include <filesystem>
#include <vector>

#include "emotion/core/binary_io.hpp"
#include "emotion/event_sim/events.hpp"
#include "emotion/event_sim/render.hpp"

namespace emotion {

// EVT1: "EVT1", u16 width, u16 height, u32 count, u32 duration_us, then
// per event u16 x, u16 y, i8 p, u8 pad(0), u32 t. Little-endian throughout.
inline io::Bytes encode_evt1(const EventStream& s) {
  if (s.width <= 0 || s.width > 65535 || s.height <= 0 || s.height > 65535) {
    throw DataError("EVT1 sensor size must fit in u16");
  }
  io::ByteWriter w;
  w.put_magic("EVT1");
  w.put(static_cast<std::uint16_t>(s.width));
  w.put(static_cast<std::uint16_t>(s.height));
  w.put(static_cast<std::uint32_t>(s.events.size()));
  w.put(s.duration_us);
  for (const Event& e : s.events) {
    w.put(e.x);
    w.put(e.y);
    w.put(e.p);
    w.put(std::uint8_t{0});
    w.put(e.t);
  }
  return w.take();
}

inline EventStream decode_evt1(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  r.expect_magic("EVT1");
  EventStream s;
  s.width = r.get<std::uint16_t>();
  s.height = r.get<std::uint16_t>();
  const auto count = r.get<std::uint32_t>();
  s.duration_us = r.get<std::uint32_t>();
  if (r.remaining() != static_cast<std::size_t>(count) * 10) {
    throw FormatError("payload size does not match event count", r.offset());
  }
  s.events.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    Event e;
    e.x = r.get<std::uint16_t>();
    e.y = r.get<std::uint16_t>();
    e.p = r.get<std::int8_t>();
    if (r.get<std::uint8_t>() != 0) throw FormatError("nonzero pad byte", at + 5);
    e.t = r.get<std::uint32_t>();
    if (e.x >= s.width || e.y >= s.height) throw FormatError("event outside sensor", at);
    if (e.p != 1 && e.p != -1) throw FormatError("bad polarity", at + 4);
    if (e.t > s.duration_us) throw FormatError("event after stream end", at + 6);
    if (!s.events.empty() && event_before(e, s.events.back())) {
      throw FormatError("events out of order", at);
    }
    s.events.push_back(e);
  }
  return s;
}

inline void write_evt1(const std::filesystem::path& path, const EventStream& s) {
  io::write_file(path, encode_evt1(s));
}

inline EventStream read_evt1(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return decode_evt1(bytes);
}

// MSK1: "MSK1", u16 width, u16 height, u32 count, then per mask u32 t_us
// followed by ceil(width*height/8) bytes of row-major bits, LSB first.
inline io::Bytes encode_msk1(const std::vector<Mask>& masks, int width, int height) {
  io::ByteWriter w;
  w.put_magic("MSK1");
  w.put(static_cast<std::uint16_t>(width));
  w.put(static_cast<std::uint16_t>(height));
  w.put(static_cast<std::uint32_t>(masks.size()));
  const std::size_t n = static_cast<std::size_t>(width) * height;
  for (const Mask& m : masks) {
    if (m.width != width || m.height != height) throw DataError("mask size mismatch");
    w.put(m.t_us);
    std::vector<std::uint8_t> packed((n + 7) / 8, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (m.cells[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    w.put_bytes(packed);
  }
  return w.take();
}

inline std::vector<Mask> decode_msk1(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  r.expect_magic("MSK1");
  const int width = r.get<std::uint16_t>();
  const int height = r.get<std::uint16_t>();
  const auto count = r.get<std::uint32_t>();
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<Mask> masks;
  for (std::uint32_t k = 0; k < count; ++k) {
    Mask m{height, width, r.get<std::uint32_t>(), std::vector<std::uint8_t>(n, 0)};
    r.require((n + 7) / 8, "truncated mask bits");
    for (std::size_t byte = 0; byte < (n + 7) / 8; ++byte) {
      const auto b = r.get<std::uint8_t>();
      for (std::size_t bit = 0; bit < 8 && byte * 8 + bit < n; ++bit) {
        m.cells[byte * 8 + bit] = (b >> bit) & 1u;
      }
    }
    masks.push_back(std::move(m));
  }
  r.expect_end();
  return masks;
}

inline void write_msk1(const std::filesystem::path& path, const std::vector<Mask>& masks, int width,
                       int height) {
  io::write_file(path, encode_msk1(masks, width, height));
}

inline std::vector<Mask> read_msk1(const std::filesystem::path& path) {
  const io::Bytes bytes = io::read_file(path);
  return decode_msk1(bytes);
}

}  // namespace emotion

#endif  // EMOTION_EVENT_SIM_EVENT_FILE_HPP_
