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

#ifndef EMOTION_HARNESS_PIPELINE_HPP_
#define EMOTION_HARNESS_PIPELINE_HPP_

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "emotion/alignment/align.hpp"
#include "emotion/alignment/reward.hpp"
#include "emotion/core/binary_io.hpp"
#include "emotion/core/error.hpp"
#include "emotion/denoiser/checkpoint.hpp"
#include "emotion/denoiser/conv_denoiser.hpp"
#include "emotion/diffusion/adam.hpp"
#include "emotion/diffusion/training.hpp"
#include "emotion/event_repr/voxel.hpp"
#include "emotion/event_repr/voxel_file.hpp"
#include "emotion/event_sim/event_file.hpp"
#include "emotion/event_sim/events.hpp"
#include "emotion/event_sim/render.hpp"
#include "emotion/event_sim/suite.hpp"
#include "emotion/harness/config.hpp"
#include "emotion/metrics/report.hpp"
#include "emotion/sampler/guided_sampler.hpp"
#include "json.hpp"

namespace emotion::pipeline {

namespace fs = std::filesystem;

inline std::string numbered(const char* prefix, int i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d", prefix, i);
  return buf;
}

inline std::string scene_stem(int i) { return numbered("scene", i); }
inline std::string clip_stem(int i) { return numbered("clip", i); }

// Runs f(i) for i in [0, n) on up to `workers` threads; rethrows the error
// of the lowest failing index.
template <typename F>
void parallel_for(int n, int workers, F&& f) {
  const int threads = std::max(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
  const auto run = [&](int first) {
    for (int i = first; i < n; i += threads) {
      try {
        f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline SceneSpec scene_spec(const RunConfig& c, int index) {
  SuiteSpec suite = c.suite;
  suite.seed = c.stage_seed(1);
  return moving_square_scene(suite, index);
}

// Ground-truth object masks at the midpoints of windows [first, first + count)
// of width `interval_us` starting at t0.
inline std::vector<Mask> window_masks(const SceneSpec& spec, std::int64_t t0, std::uint32_t interval_us,
                                      int count) {
  std::vector<Mask> masks;
  for (int k = 0; k < count; ++k) {
    masks.push_back(object_mask(spec, t0 + static_cast<std::int64_t>(k) * interval_us + interval_us / 2));
  }
  return masks;
}

// The jointly normalised F-window clip used for evaluation and alignment.
inline VoxelSequence evaluation_clip(const RunConfig& c, const EventStream& stream) {
  return normalize_sequence(windowize(stream, c.representation.interval_us, c.clip_start(),
                                      c.representation.frames, c.representation.bins));
}

// Scenes, event files, masks and held-out (prompt, truth) clip pairs.
inline void gen_data(const RunConfig& c, const fs::path& dir, int workers) {
  fs::create_directories(dir / "heldout");
  const int train = c.training_scenes();
  const int s = c.prompt_frames;
  const int f = c.representation.frames;
  parallel_for(c.suite.count, workers, [&](int i) {
    const SceneSpec spec = scene_spec(c, i);
    const EventStream stream = emit_events(spec, c.events);
    const std::string stem = scene_stem(i);
    {
      std::ofstream out(dir / (stem + ".json"));
      out << nlohmann::json(spec).dump(2) << '\n';
    }
    write_evt1(dir / (stem + ".evt1"), stream);
    const int windows = static_cast<int>(spec.duration_us / c.representation.interval_us);
    write_msk1(dir / (stem + ".msk1"), window_masks(spec, 0, c.representation.interval_us, windows),
               spec.width, spec.height);
    if (i >= train) {
      const VoxelSequence clip = evaluation_clip(c, stream);
      const std::string cs = clip_stem(i);
      write_vox1(dir / "heldout" / (cs + ".prompt.vox1"), clip.slice(0, s));
      write_vox1(dir / "heldout" / (cs + ".truth.vox1"), clip.slice(s, f - s));
      const std::int64_t t0 = c.clip_start() + static_cast<std::int64_t>(s) * c.representation.interval_us;
      write_msk1(dir / "heldout" / (cs + ".mask.msk1"),
                 window_masks(spec, t0, c.representation.interval_us, f - s), spec.width, spec.height);
    }
  });
  nlohmann::json manifest{{"suite", c.suite.name},
                          {"count", c.suite.count},
                          {"height", c.suite.height},
                          {"width", c.suite.width},
                          {"duration_us", c.suite.duration_us},
                          {"training", nlohmann::json::array()},
                          {"heldout", nlohmann::json::array()}};
  for (int i = 0; i < c.suite.count; ++i) {
    manifest[i < train ? "training" : "heldout"].push_back(scene_stem(i));
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  spdlog::info("generated {} scenes ({} training, {} held out) in {}", c.suite.count, train,
               c.suite.count - train, dir.string());
}

inline std::vector<EventStream> load_streams(const fs::path& data_dir, int first, int count) {
  std::vector<EventStream> streams;
  for (int i = first; i < first + count; ++i) {
    const fs::path p = data_dir / (scene_stem(i) + ".evt1");
    if (!fs::exists(p)) throw DataError("missing event file " + p.string());
    streams.push_back(read_evt1(p));
  }
  return streams;
}

inline Denoiser make_denoiser(const RunConfig& c) {
  return Denoiser(c.arch(), c.schedule.sigma_data, c.stage_seed(3));
}

inline ClipSamplerParams clip_params(const RunConfig& c) {
  return {c.representation.frames, c.representation.bins, c.training.intervals_us,
          c.training.min_prompt, c.training.max_prompt};
}

inline Denoiser train_model(const RunConfig& c, std::span<const EventStream> streams,
                            const std::function<void(int, double)>& on_step = {}) {
  Denoiser model = make_denoiser(c);
  Adam optimizer(model.parameter_count(), AdamParams{c.training.learning_rate, 0.9, 0.999, 1e-8});
  const ClipSampler clips(streams, clip_params(c));
  train_loop(model, optimizer, clips, c.make_noise_schedule(),
             TrainLoopParams{c.training.iterations, c.training.batch, c.training.accumulation,
                             c.stage_seed(2)},
             on_step);
  return model;
}

// Trains on the non-held-out scenes; writes model.ckpt1 and train_log.jsonl.
inline Checkpoint train(const RunConfig& c, const fs::path& data_dir, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto streams = load_streams(data_dir, 0, c.training_scenes());
  std::ofstream log(out_dir / "train_log.jsonl");
  const int every = c.training.log_every;
  const int last = c.training.iterations - 1;
  const Denoiser model = train_model(c, streams, [&](int it, double loss) {
    if (it % every == 0 || it == last) {
      log << nlohmann::json{{"iteration", it}, {"loss", loss}}.dump() << '\n';
      spdlog::info("train step {}/{} loss {:.6f}", it + 1, c.training.iterations, loss);
    }
  });
  const Checkpoint ckpt = make_checkpoint(model, c.schedule,
                                          static_cast<std::uint64_t>(c.training.iterations), c.seed);
  write_ckpt1(out_dir / "model.ckpt1", ckpt);
  return ckpt;
}

struct SampleOptions {
  std::uint64_t seed = 0;
  int switch_step = 0;  // 0: ceil(0.3 T)
  bool renoise = false;
  bool unguided = false;
  int frames = 5;
};

// Generates the frames that follow `prompt` (latent frames [s, F)).
template <CleanEstimator M>
VoxelSequence predict_future(M& model, const VoxelSequence& prompt, const NoiseSchedule& schedule,
                             const SampleOptions& o) {
  SamplerConfig cfg;
  cfg.steps = schedule.steps;
  cfg.switch_step = o.switch_step == 0 ? SamplerConfig::default_switch_step(schedule.steps) : o.switch_step;
  cfg.prompt_frames = prompt.frames;
  cfg.frames = o.frames;
  cfg.seed = o.seed;
  cfg.renoise = o.renoise;
  const VoxelSequence x = o.unguided ? sample_unguided(model, prompt, schedule, cfg)
                                     : sample(model, prompt, schedule, cfg);
  VoxelSequence future = x.slice(prompt.frames, o.frames - prompt.frames);
  future.t0 = prompt.t0 + static_cast<std::int64_t>(prompt.frames) * prompt.window_us;
  future.window_us = prompt.window_us;
  return future;
}

inline constexpr const char* kPromptSuffix = ".prompt.vox1";
inline constexpr const char* kTruthSuffix = ".truth.vox1";
inline constexpr const char* kMaskSuffix = ".mask.msk1";

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Prompt files under `path` (or `path` itself), sorted by name.
inline std::vector<fs::path> prompt_files(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("no such prompt path " + path.string());
  if (!fs::is_directory(path)) return {path};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.is_regular_file() && ends_with(e.path().filename().string(), kPromptSuffix)) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no *" + std::string(kPromptSuffix) + " files in " + path.string());
  return out;
}

inline std::string stem_of(const fs::path& p) {
  std::string name = p.filename().string();
  for (const char* suffix : {kPromptSuffix, kTruthSuffix, ".vox1"}) {
    if (ends_with(name, suffix)) return name.substr(0, name.size() - std::string(suffix).size());
  }
  return p.stem().string();
}

// Samples one future per prompt file into out_dir/<stem>.vox1. Chain i uses
// seed stream i of `o.seed`.
inline std::vector<std::pair<std::string, VoxelSequence>> sample_files(const Checkpoint& ckpt,
                                                                       const fs::path& prompts,
                                                                       const fs::path& out_dir,
                                                                       SampleOptions o) {
  Denoiser model = load_model<float>(ckpt);
  const NoiseSchedule schedule = make_schedule(ckpt.schedule);
  o.frames = ckpt.arch.frames;
  const RandomSource seeds(o.seed, 0x5a3);
  std::vector<std::pair<std::string, VoxelSequence>> out;
  const auto files = prompt_files(prompts);
  for (std::size_t i = 0; i < files.size(); ++i) {
    const VoxelSequence prompt = read_vox1(files[i]);
    SampleOptions oi = o;
    oi.seed = seeds.bits_at(i);
    VoxelSequence future = predict_future(model, prompt, schedule, oi);
    const std::string stem = stem_of(files[i]);
    write_vox1(out_dir / (stem + ".vox1"), future);
    spdlog::debug("sampled {}", stem);
    out.emplace_back(stem, std::move(future));
  }
  spdlog::info("sampled {} prompt file(s) into {}", files.size(), out_dir.string());
  return out;
}

inline nlohmann::json to_json(const EpochMetrics& m) {
  return nlohmann::json{{"epoch", m.epoch},
                        {"stamp", m.stamp},
                        {"mean_raw_reward", m.mean_raw_reward},
                        {"mean_standardized_reward", m.mean_standardized},
                        {"mean_adjusted_reward", m.mean_adjusted},
                        {"loss", m.loss},
                        {"kl", m.kl},
                        {"ratio_mean", m.ratio_mean},
                        {"ratio_min", m.ratio_min},
                        {"ratio_max", m.ratio_max},
                        {"clip_fraction", m.clip_fraction},
                        {"discarded", m.discarded}};
}

// Aligns a checkpoint on clips of the first `alignment.prompts` training
// scenes; writes aligned.ckpt1 and align_log.jsonl.
inline Checkpoint align(const RunConfig& c, const Checkpoint& base, const fs::path& data_dir,
                        const fs::path& out_dir) {
  if (!(base.arch == c.arch())) throw ValidationError("denoiser", "checkpoint architecture differs from config");
  fs::create_directories(out_dir);
  const auto streams = load_streams(data_dir, 0, c.alignment.prompts);
  std::vector<VoxelSequence> prompts, targets;
  for (const auto& s : streams) {
    VoxelSequence clip = evaluation_clip(c, s);
    prompts.push_back(clip.slice(0, c.prompt_frames));
    targets.push_back(std::move(clip));
  }
  Aligner<Denoiser, SequenceReward> aligner(load_model<float>(base), std::move(prompts),
                                            SequenceReward(std::move(targets), c.alignment.reward),
                                            make_schedule(base.schedule), c.align_config());
  std::ofstream log(out_dir / "align_log.jsonl");
  for (int e = 0; e < c.alignment.epochs; ++e) {
    const EpochMetrics m = aligner.epoch();
    nlohmann::json line = to_json(m);
    line["kl_within_ceiling"] = m.kl <= c.alignment.kl_ceiling;
    log << line.dump() << '\n';
    spdlog::info("align epoch {} reward {:.5f} kl {:.5f} ratio [{:.4f}, {:.4f}]", m.epoch,
                 m.mean_raw_reward, m.kl, m.ratio_min, m.ratio_max);
    if (m.kl > c.alignment.kl_ceiling) {
      spdlog::warn("epoch {} KL {:.4f} exceeds the ceiling {:.4f}", m.epoch, m.kl, c.alignment.kl_ceiling);
    }
  }
  Checkpoint out = make_checkpoint(aligner.policy(), base.schedule, base.step, base.seed);
  write_ckpt1(out_dir / "aligned.ckpt1", out);
  return out;
}

// Pairs <stem>.vox1 predictions with <stem>.truth.vox1 (and optional
// <stem>.mask.msk1) under truth_dir.
inline MetricReport evaluate_dirs(const fs::path& pred_dir, const fs::path& truth_dir) {
  if (!fs::is_directory(truth_dir)) throw DataError("no such truth directory " + truth_dir.string());
  std::vector<fs::path> truths;
  for (const auto& e : fs::directory_iterator(truth_dir)) {
    if (e.is_regular_file() && ends_with(e.path().filename().string(), kTruthSuffix)) {
      truths.push_back(e.path());
    }
  }
  std::sort(truths.begin(), truths.end());
  if (truths.empty()) throw DataError("no *" + std::string(kTruthSuffix) + " files in " + truth_dir.string());
  std::vector<VoxelSequence> pred, truth;
  std::vector<std::vector<Mask>> masks;
  bool have_masks = true;
  for (const auto& t : truths) {
    const std::string stem = stem_of(t);
    const fs::path p = pred_dir / (stem + ".vox1");
    if (!fs::exists(p)) throw DataError("missing prediction " + p.string());
    pred.push_back(read_vox1(p));
    truth.push_back(read_vox1(t));
    const fs::path m = truth_dir / (stem + kMaskSuffix);
    if (fs::exists(m)) {
      masks.push_back(read_msk1(m));
      if (masks.back().size() != static_cast<std::size_t>(truth.back().frames)) {
        throw DataError(m.string() + " does not hold one mask per truth frame");
      }
    } else {
      have_masks = false;
    }
  }
  std::optional<std::vector<std::vector<Mask>>> gt;
  if (have_masks) gt = std::move(masks);
  return evaluate_sequences(pred, truth, gt);
}

}  // namespace emotion::pipeline

#endif  // EMOTION_HARNESS_PIPELINE_HPP_
