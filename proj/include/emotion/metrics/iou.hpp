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

#ifndef EMOTION_METRICS_IOU_HPP_
#define EMOTION_METRICS_IOU_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/event_repr/voxel.hpp"
#include "emotion/event_sim/render.hpp"

namespace emotion {

struct IouCounts {
  std::size_t intersection = 0;
  std::size_t union_ = 0;
};

inline IouCounts iou_counts(const Mask& pred, const Mask& gt) {
  if (pred.height != gt.height || pred.width != gt.width ||
      pred.cells.size() != gt.cells.size()) {
    throw DataError("iou: mask shapes differ");
  }
  IouCounts c;
  for (std::size_t i = 0; i < pred.cells.size(); ++i) {
    c.intersection += (pred.cells[i] && gt.cells[i]) ? 1 : 0;
    c.union_ += (pred.cells[i] || gt.cells[i]) ? 1 : 0;
  }
  return c;
}

// |A and B| / |A or B|, defined as 1 when both masks are empty.
inline double iou_pair(const Mask& pred, const Mask& gt) {
  const IouCounts c = iou_counts(pred, gt);
  return c.union_ == 0 ? 1.0 : static_cast<double>(c.intersection) / static_cast<double>(c.union_);
}

struct IouSummary {
  double miou = 1.0;  // mean per-frame IoU
  double aiou = 1.0;  // IoU of intersections and unions pooled over frames
};

inline IouSummary miou_aiou(std::span<const std::pair<Mask, Mask>> pairs) {
  if (pairs.empty()) return {};
  double sum = 0.0;
  std::size_t inter = 0, uni = 0;
  for (const auto& [pred, gt] : pairs) {
    const IouCounts c = iou_counts(pred, gt);
    sum += c.union_ == 0 ? 1.0 : static_cast<double>(c.intersection) / static_cast<double>(c.union_);
    inter += c.intersection;
    uni += c.union_;
  }
  return {sum / static_cast<double>(pairs.size()),
          uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni)};
}

// Activity mask of one voxel frame: max over bins of |v| above
// `threshold` times the frame's peak, followed by a 3x3 closing
// (dilation then erosion, neighbourhoods clipped at the border).
inline Mask activity_mask(const VoxelSequence& seq, int frame, double threshold = 0.1) {
  if (frame < 0 || frame >= seq.frames) throw RangeError("activity mask frame out of range");
  const int h = seq.height, w = seq.width;
  Mask m{h, w, 0, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w, 0)};
  std::vector<double> act(m.cells.size(), 0.0);
  double peak = 0.0;
  for (int b = 0; b < seq.bins; ++b) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double& a = act[static_cast<std::size_t>(y) * w + x];
        a = std::max(a, std::abs(seq.at(frame, b, y, x)));
        peak = std::max(peak, a);
      }
    }
  }
  if (peak == 0.0) return m;
  for (std::size_t i = 0; i < act.size(); ++i) m.cells[i] = act[i] > threshold * peak ? 1 : 0;

  const auto morph = [h, w](const std::vector<std::uint8_t>& in, bool dilate) {
    std::vector<std::uint8_t> out(in.size(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        bool v = !dilate;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            const bool c = in[static_cast<std::size_t>(yy) * w + xx] != 0;
            v = dilate ? (v || c) : (v && c);
          }
        }
        out[static_cast<std::size_t>(y) * w + x] = v ? 1 : 0;
      }
    }
    return out;
  };
  m.cells = morph(morph(m.cells, true), false);
  return m;
}

}  // namespace emotion

#endif  // EMOTION_METRICS_IOU_HPP_
