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

#ifndef EMOTION_HARNESS_CONFIG_HPP_
#define EMOTION_HARNESS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "emotion/alignment/align.hpp"
#include "emotion/alignment/reward.hpp"
#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/denoiser/conv_denoiser.hpp"
#include "emotion/diffusion/schedule.hpp"
#include "emotion/event_sim/events.hpp"
#include "emotion/event_sim/suite.hpp"
#include "emotion/sampler/guided_sampler.hpp"
#include "json.hpp"

namespace emotion {

struct RepresentationConfig {
  int bins = kDefaultBins;
  std::uint32_t interval_us = kDefaultIntervalUs;
  int frames = 5;  // F, frames per clip
  // Start of the evaluation clip; negative centres it in the scene.
  std::int64_t clip_start_us = -1;
};

struct TrainingConfig {
  double learning_rate = 3e-4;
  int batch = 8;
  int accumulation = 1;
  int iterations = 5000;
  std::vector<std::uint32_t> intervals_us{10000, 20000, 40000};
  int min_prompt = 1;
  int max_prompt = 4;
  int log_every = 50;
};

struct AlignmentConfig {
  std::size_t pool_size = 64;
  int workers = 1;
  int iterations_per_refresh = 100;
  double clip = 0.2;
  double kl_weight = 0.1;
  double diversity_beta = 30.0;
  int samples_per_prompt = 2;
  std::size_t batch = 64;
  double learning_rate = 1e-5;
  int epochs = 10;
  double kl_ceiling = 5.0;
  std::int64_t pool_timeout_ms = 600000;
  bool deterministic = false;
  int prompts = 32;  // training clips used as alignment prompts
  RewardWeights reward;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "run";
  SuiteSpec suite;
  EventSimParams events;
  RepresentationConfig representation;
  int heldout = 50;
  ScheduleParams schedule;
  int hidden = 32;
  int layers = 4;
  int kernel = 3;
  TrainingConfig training;
  int prompt_frames = 4;
  int switch_step = 0;  // 0 resolves to ceil(0.3 T)
  bool renoise = false;
  AlignmentConfig alignment;

  std::uint64_t stage_seed(std::uint64_t stage) const noexcept {
    return RandomSource(seed, 0x5eed).bits_at(stage);
  }
  DenoiserArch arch() const { return {representation.frames, representation.bins, hidden, layers, kernel}; }
  NoiseSchedule make_noise_schedule() const { return make_schedule(schedule); }
  std::int64_t clip_start() const {
    if (representation.clip_start_us >= 0) return representation.clip_start_us;
    const std::int64_t span = static_cast<std::int64_t>(representation.interval_us) * representation.frames;
    return (static_cast<std::int64_t>(suite.duration_us) - span) / 2 / 1000 * 1000;
  }
  int training_scenes() const { return suite.count - heldout; }
  SamplerConfig sampler(std::uint64_t seed_value) const {
    SamplerConfig c;
    c.steps = schedule.steps;
    c.switch_step = switch_step;
    c.prompt_frames = prompt_frames;
    c.frames = representation.frames;
    c.seed = seed_value;
    c.renoise = renoise;
    return c;
  }
  AlignConfig align_config() const {
    AlignConfig c;
    c.pool_size = alignment.pool_size;
    c.batch = alignment.batch;
    c.samples_per_prompt = alignment.samples_per_prompt;
    c.iterations_per_refresh = alignment.iterations_per_refresh;
    c.clip = alignment.clip;
    c.kl_weight = alignment.kl_weight;
    c.diversity_beta = alignment.diversity_beta;
    c.learning_rate = alignment.learning_rate;
    c.kl_ceiling = alignment.kl_ceiling;
    c.workers = alignment.workers;
    c.deterministic = alignment.deterministic;
    c.pool_timeout = std::chrono::milliseconds(alignment.pool_timeout_ms);
    c.seed = stage_seed(5);
    c.sampler = sampler(0);
    c.sampler.renoise = true;
    return c;
  }
};

namespace detail {

// Reads keys of one JSON object, rejecting wrong types and unknown keys with
// the dotted field path.
class FieldReader {
 public:
  FieldReader(const nlohmann::json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ValidationError(prefix_.empty() ? "config" : prefix_, "must be an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path(key), std::string("wrong type (") + e.what() + ")");
    }
  }

  template <typename F>
  void section(const std::string& key, F&& body) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    FieldReader sub(*it, path(key));
    body(sub);
    sub.finish();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError(path(it.key()), "unknown key");
    }
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  const nlohmann::json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

}  // namespace detail

// Checks every field against the preconditions of the module that consumes
// it. Resolves switch_step when left at 0.
inline void validate(RunConfig& c) {
  using detail::require;
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
  require(c.suite.name == "moving-square", "suite.name", "only \"moving-square\" is bundled");
  require(c.suite.count >= 2, "suite.count", "must be at least 2");
  require(c.suite.height >= 8 && c.suite.width >= 8, "suite.height", "canvas must be at least 8x8");
  require(c.suite.height <= 65535 && c.suite.width <= 65535, "suite.width", "must fit 16 bits");
  require(c.events.threshold > 0.0, "events.threshold", "must be positive");
  require(c.events.dt_us > 0, "events.dt_us", "must be positive");
  require(c.events.intensity_floor > 0.0, "events.intensity_floor", "must be positive");
  require(c.representation.bins >= 1, "representation.bins", "must be at least 1");
  require(c.representation.interval_us > 0, "representation.interval_us", "must be positive");
  require(c.representation.frames >= 1, "representation.frames", "must be at least 1");
  require(c.heldout >= 1 && c.heldout < c.suite.count, "heldout", "must lie in [1, suite.count)");
  const std::int64_t span =
      static_cast<std::int64_t>(c.representation.interval_us) * c.representation.frames;
  require(c.clip_start() >= 0 && c.clip_start() + span <= c.suite.duration_us,
          "representation.clip_start_us", "evaluation clip must lie inside the scene");
  try {
    make_schedule(c.schedule);
  } catch (const Error& e) {
    throw ValidationError("schedule", e.what());
  }
  try {
    c.arch().validate();
  } catch (const Error& e) {
    throw ValidationError("denoiser", e.what());
  }
  const auto& t = c.training;
  require(t.learning_rate > 0.0, "training.learning_rate", "must be positive");
  require(t.batch >= 1, "training.batch", "must be at least 1");
  require(t.accumulation >= 1 && t.batch % t.accumulation == 0, "training.accumulation",
          "must divide training.batch");
  require(t.iterations >= 0, "training.iterations", "must be non-negative");
  require(t.log_every >= 1, "training.log_every", "must be at least 1");
  require(!t.intervals_us.empty(), "training.intervals_us", "must not be empty");
  for (auto w : t.intervals_us) {
    require(w > 0 && static_cast<std::uint64_t>(w) * c.representation.frames <= c.suite.duration_us,
            "training.intervals_us", "every interval times frames must fit the scene");
  }
  require(t.min_prompt >= 0 && t.min_prompt <= t.max_prompt && t.max_prompt <= c.representation.frames,
          "training.min_prompt", "need 0 <= min_prompt <= max_prompt <= frames");
  if (c.switch_step == 0) c.switch_step = SamplerConfig::default_switch_step(c.schedule.steps);
  require(c.prompt_frames >= 1 && c.prompt_frames < c.representation.frames, "sampler.prompt_frames",
          "must lie in [1, frames)");
  try {
    validate(c.sampler(0));
  } catch (const Error& e) {
    throw ValidationError("sampler.switch_step", e.what());
  }
  try {
    validate(c.align_config());
  } catch (const ValidationError& e) {
    throw ValidationError("alignment." + e.field(), e.what());
  }
  require(c.alignment.epochs >= 0, "alignment.epochs", "must be non-negative");
  require(c.alignment.prompts >= 1 && c.alignment.prompts <= c.training_scenes(), "alignment.prompts",
          "must lie in [1, training scenes]");
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig c;
  detail::FieldReader r(j, "");
  r.read("seed", c.seed);
  r.read("output_dir", c.output_dir);
  r.section("suite", [&](detail::FieldReader& s) {
    s.read("name", c.suite.name);
    s.read("count", c.suite.count);
    s.read("height", c.suite.height);
    s.read("width", c.suite.width);
    s.read("duration_us", c.suite.duration_us);
  });
  r.section("events", [&](detail::FieldReader& s) {
    s.read("threshold", c.events.threshold);
    s.read("dt_us", c.events.dt_us);
    s.read("intensity_floor", c.events.intensity_floor);
  });
  r.section("representation", [&](detail::FieldReader& s) {
    s.read("bins", c.representation.bins);
    s.read("interval_us", c.representation.interval_us);
    s.read("frames", c.representation.frames);
    s.read("clip_start_us", c.representation.clip_start_us);
  });
  r.read("heldout", c.heldout);
  r.section("schedule", [&](detail::FieldReader& s) {
    s.read("steps", c.schedule.steps);
    s.read("sigma_min", c.schedule.sigma_min);
    s.read("sigma_max", c.schedule.sigma_max);
    s.read("sigma_data", c.schedule.sigma_data);
  });
  r.section("denoiser", [&](detail::FieldReader& s) {
    s.read("hidden", c.hidden);
    s.read("layers", c.layers);
    s.read("kernel", c.kernel);
  });
  r.section("training", [&](detail::FieldReader& s) {
    s.read("learning_rate", c.training.learning_rate);
    s.read("batch", c.training.batch);
    s.read("accumulation", c.training.accumulation);
    s.read("iterations", c.training.iterations);
    s.read("intervals_us", c.training.intervals_us);
    s.read("min_prompt", c.training.min_prompt);
    s.read("max_prompt", c.training.max_prompt);
    s.read("log_every", c.training.log_every);
  });
  r.section("sampler", [&](detail::FieldReader& s) {
    s.read("prompt_frames", c.prompt_frames);
    s.read("switch_step", c.switch_step);
    s.read("renoise", c.renoise);
  });
  r.section("alignment", [&](detail::FieldReader& s) {
    auto& a = c.alignment;
    s.read("pool_size", a.pool_size);
    s.read("workers", a.workers);
    s.read("iterations_per_refresh", a.iterations_per_refresh);
    s.read("clip", a.clip);
    s.read("kl_weight", a.kl_weight);
    s.read("diversity_beta", a.diversity_beta);
    s.read("samples_per_prompt", a.samples_per_prompt);
    s.read("batch", a.batch);
    s.read("learning_rate", a.learning_rate);
    s.read("epochs", a.epochs);
    s.read("kl_ceiling", a.kl_ceiling);
    s.read("pool_timeout_ms", a.pool_timeout_ms);
    s.read("deterministic", a.deterministic);
    s.read("prompts", a.prompts);
    s.section("reward", [&](detail::FieldReader& w) {
      w.read("ssim", a.reward.ssim);
      w.read("distance", a.reward.distance);
      w.read("mse", a.reward.mse);
    });
  });
  r.finish();
  return c;
}

inline nlohmann::json to_json(const RunConfig& c) {
  const auto& a = c.alignment;
  return nlohmann::json{
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"suite",
       {{"name", c.suite.name},
        {"count", c.suite.count},
        {"height", c.suite.height},
        {"width", c.suite.width},
        {"duration_us", c.suite.duration_us}}},
      {"events",
       {{"threshold", c.events.threshold},
        {"dt_us", c.events.dt_us},
        {"intensity_floor", c.events.intensity_floor}}},
      {"representation",
       {{"bins", c.representation.bins},
        {"interval_us", c.representation.interval_us},
        {"frames", c.representation.frames},
        {"clip_start_us", c.clip_start()}}},
      {"heldout", c.heldout},
      {"schedule",
       {{"steps", c.schedule.steps},
        {"sigma_min", c.schedule.sigma_min},
        {"sigma_max", c.schedule.sigma_max},
        {"sigma_data", c.schedule.sigma_data}}},
      {"denoiser", {{"hidden", c.hidden}, {"layers", c.layers}, {"kernel", c.kernel}}},
      {"training",
       {{"learning_rate", c.training.learning_rate},
        {"batch", c.training.batch},
        {"accumulation", c.training.accumulation},
        {"iterations", c.training.iterations},
        {"intervals_us", c.training.intervals_us},
        {"min_prompt", c.training.min_prompt},
        {"max_prompt", c.training.max_prompt},
        {"log_every", c.training.log_every}}},
      {"sampler",
       {{"prompt_frames", c.prompt_frames},
        {"switch_step", c.switch_step == 0 ? SamplerConfig::default_switch_step(c.schedule.steps)
                                           : c.switch_step},
        {"renoise", c.renoise}}},
      {"alignment",
       {{"pool_size", a.pool_size},
        {"workers", a.workers},
        {"iterations_per_refresh", a.iterations_per_refresh},
        {"clip", a.clip},
        {"kl_weight", a.kl_weight},
        {"diversity_beta", a.diversity_beta},
        {"samples_per_prompt", a.samples_per_prompt},
        {"batch", a.batch},
        {"learning_rate", a.learning_rate},
        {"epochs", a.epochs},
        {"kl_ceiling", a.kl_ceiling},
        {"pool_timeout_ms", a.pool_timeout_ms},
        {"deterministic", a.deterministic},
        {"prompts", a.prompts},
        {"reward", {{"ssim", a.reward.ssim}, {"distance", a.reward.distance}, {"mse", a.reward.mse}}}}}};
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("config is not valid JSON: " + std::string(e.what()), e.byte);
  }
  return parse_run_config(j);
}

}  // namespace emotion

#endif  // EMOTION_HARNESS_CONFIG_HPP_
