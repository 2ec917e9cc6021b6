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

#ifndef EMOTION_METRICS_REPORT_HPP_
#define EMOTION_METRICS_REPORT_HPP_

#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emotion/metrics/feature_distance.hpp"
#include "emotion/metrics/image_metrics.hpp"
#include "emotion/metrics/iou.hpp"
#include "json.hpp"

namespace emotion {

struct SequenceMetrics {
  double mse = 0.0;
  double ssim = 1.0;
  double miou = 1.0;
  double aiou = 1.0;
};

struct MetricReport {
  double mse = 0.0;
  double ssim = 1.0;
  double feature_video_distance = 0.0;
  double miou = 1.0;
  double aiou = 1.0;
  std::vector<SequenceMetrics> per_sequence;
};

inline void to_json(nlohmann::json& j, const SequenceMetrics& m) {
  j = nlohmann::json{{"mse", m.mse}, {"ssim", m.ssim}, {"miou", m.miou}, {"aiou", m.aiou}};
}

inline void to_json(nlohmann::json& j, const MetricReport& r) {
  j = nlohmann::json{{"mse", r.mse},
                     {"ssim", r.ssim},
                     {"feature_video_distance", r.feature_video_distance},
                     {"miou", r.miou},
                     {"aiou", r.aiou},
                     {"per_sequence", r.per_sequence}};
}

// Compares predicted against ground-truth voxel sequences (signed values in
// [-1, 1]). Ground-truth masks, when given, hold one mask per frame for each
// sequence; otherwise the truth's own activity masks are used.
inline MetricReport evaluate_sequences(
    std::span<const VoxelSequence> predicted, std::span<const VoxelSequence> truth,
    const std::optional<std::vector<std::vector<Mask>>>& gt_masks = std::nullopt) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw DataError("evaluation needs equally many (>= 1) predicted and true sequences");
  }
  if (gt_masks && gt_masks->size() != truth.size()) {
    throw DataError("ground-truth masks must be given for every sequence");
  }
  MetricReport r;
  r.mse = 0.0;
  r.ssim = 0.0;
  std::vector<std::pair<Mask, Mask>> all_pairs;
  double miou_sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const VoxelSequence& p = predicted[i];
    const VoxelSequence& t = truth[i];
    require_same_shape(p, t, "evaluate");
    SequenceMetrics m;
    m.mse = mse(p, t);
    m.ssim = ssim(to_metric_range(p), to_metric_range(t));
    std::vector<std::pair<Mask, Mask>> pairs;
    for (int f = 0; f < p.frames; ++f) {
      Mask gt = gt_masks ? (*gt_masks)[i].at(static_cast<std::size_t>(f)) : activity_mask(t, f);
      pairs.emplace_back(activity_mask(p, f), std::move(gt));
    }
    const IouSummary s = miou_aiou(pairs);
    m.miou = s.miou;
    m.aiou = s.aiou;
    r.mse += m.mse;
    r.ssim += m.ssim;
    miou_sum += m.miou;
    all_pairs.insert(all_pairs.end(), pairs.begin(), pairs.end());
    r.per_sequence.push_back(m);
  }
  const double n = static_cast<double>(predicted.size());
  r.mse /= n;
  r.ssim /= n;
  r.miou = miou_sum / n;
  r.aiou = miou_aiou(all_pairs).aiou;
  r.feature_video_distance = feature_video_distance(predicted, truth);
  return r;
}

// Plain-text table: MSE, SSIM, FVD (random-feature proxy), mIoU, aIoU.
inline std::string format_report_table(const MetricReport& r) {
  char buf[256];
  std::string out = "| MSE      | SSIM    | FVD*       | mIoU  | aIoU  |\n"
                    "|----------|---------|------------|-------|-------|\n";
  std::snprintf(buf, sizeof(buf), "| %.6f | %.5f | %10.4f | %.3f | %.3f |\n", r.mse, r.ssim,
                r.feature_video_distance, r.miou, r.aiou);
  out += buf;
  out += "* Frechet distance on frozen random features\n";
  return out;
}

}  // namespace emotion

#endif  // EMOTION_METRICS_REPORT_HPP_
