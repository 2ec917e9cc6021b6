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

#ifndef EMOTION_TOOLS_PNG_WRITER_HPP_
#define EMOTION_TOOLS_PNG_WRITER_HPP_

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/event_repr/voxel.hpp"

namespace emotion::tools {

inline void write_gray_png(const std::filesystem::path& path, int width, int height,
                           const std::vector<std::uint8_t>& pixels) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw DataError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// One image per frame: the bin-summed voxel value mapped from [-1, 1] to
// [0, 255], so mid-gray means no net events.
inline void render_frames(const VoxelSequence& seq, const std::filesystem::path& dir,
                          const std::string& stem) {
  std::filesystem::create_directories(dir);
  for (int f = 0; f < seq.frames; ++f) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(seq.height) * seq.width);
    for (int y = 0; y < seq.height; ++y) {
      for (int x = 0; x < seq.width; ++x) {
        double v = 0.0;
        for (int b = 0; b < seq.bins; ++b) v += seq.at(f, b, y, x);
        v = std::clamp(v, -1.0, 1.0);
        px[static_cast<std::size_t>(y) * seq.width + x] =
            static_cast<std::uint8_t>(std::lround((v + 1.0) * 127.5));
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "_f%02d.png", f);
    write_gray_png(dir / (stem + name), seq.width, seq.height, px);
  }
}

}  // namespace emotion::tools

#endif  // EMOTION_TOOLS_PNG_WRITER_HPP_
