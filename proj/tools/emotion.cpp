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

// Command-line front end: gen-data, train, sample, align, evaluate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "emotion/core/error.hpp"
#include "emotion/denoiser/checkpoint.hpp"
#include "emotion/harness/config.hpp"
#include "emotion/harness/log.hpp"
#include "emotion/harness/pipeline.hpp"
#include "emotion/metrics/report.hpp"
#include "json.hpp"
#include "png_writer.hpp"

namespace fs = std::filesystem;
using emotion::RunConfig;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
  bool deterministic = false;
};

int exit_code(std::string_view kind) {
  static const std::pair<const char*, int> codes[] = {
      {"parameter", 2}, {"range", 3},     {"data", 4},    {"numerical", 5}, {"state", 6},
      {"staleness", 7}, {"timeout", 8},   {"format", 9},  {"validation", 10}};
  for (const auto& [k, c] : codes) {
    if (kind == k) return c;
  }
  return 1;
}

void report_error(std::string_view kind, const std::string& message, const nlohmann::json& extra = {}) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  if (extra.is_object()) j.update(extra);
  std::cerr << j.dump() << '\n';
}

// Loads --config (or defaults), applies flag overrides, validates, and
// prints the effective configuration.
RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : emotion::load_run_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.workers) c.alignment.workers = *f.workers;
  if (f.deterministic) c.alignment.deterministic = true;
  emotion::validate(c);
  const nlohmann::json dump = emotion::to_json(c);
  std::cout << dump.dump(2) << std::endl;
  fs::create_directories(c.output_dir);
  std::ofstream(fs::path(c.output_dir) / "effective_config.json") << dump.dump(2) << '\n';
  return c;
}

void add_common(CLI::App* app, CommonFlags& f, bool with_workers) {
  app->add_option("--config", f.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "Global seed");
  app->add_option("--out", f.out, "Output directory");
  if (with_workers) {
    app->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
    app->add_flag("--deterministic", f.deterministic, "Single-threaded round-robin scheduling");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-sequence diffusion: data generation, training, sampling, alignment, evaluation"};
  app.require_subcommand(1);

  CommonFlags gen_flags, train_flags, align_flags;
  std::string train_data, align_data, align_ckpt;

  auto* gen = app.add_subcommand("gen-data", "Simulate the scene suite into EVT1 + mask files");
  add_common(gen, gen_flags, true);

  auto* train = app.add_subcommand("train", "Train the denoiser; writes model.ckpt1");
  add_common(train, train_flags, false);
  train->add_option("--data", train_data, "Dataset directory (default <out>/data)");

  std::string sample_ckpt, sample_prompt, sample_out, render_dir;
  std::uint64_t sample_seed = 0;
  int switch_step = 0;
  bool renoise = false, unguided = false;
  auto* smp = app.add_subcommand("sample", "Generate future frames for prompt files");
  smp->add_option("--checkpoint", sample_ckpt, "CKPT1 file")->required()->check(CLI::ExistingFile);
  smp->add_option("--prompt", sample_prompt, "Prompt VOX1 file or directory of *.prompt.vox1")
      ->required();
  smp->add_option("--out", sample_out, "Output directory")->required();
  smp->add_option("--seed", sample_seed, "Sampling seed");
  smp->add_option("--switch-step", switch_step, "Last guided step tau (default ceil(0.3 T))");
  smp->add_flag("--renoise", renoise, "Ancestral sampling instead of the deterministic chain");
  smp->add_flag("--unguided", unguided, "Disable prompt replacement");
  smp->add_option("--render", render_dir, "Also write per-frame PNG images here");

  auto* aln = app.add_subcommand("align", "Reward-align a checkpoint; writes aligned.ckpt1");
  add_common(aln, align_flags, true);
  aln->add_option("--checkpoint", align_ckpt, "CKPT1 file")->required()->check(CLI::ExistingFile);
  aln->add_option("--data", align_data, "Dataset directory (default <out>/data)");

  std::string eval_pred, eval_truth, eval_out;
  auto* evl = app.add_subcommand("evaluate", "Score predictions against held-out truth");
  evl->add_option("--pred", eval_pred, "Directory of <stem>.vox1 predictions")->required();
  evl->add_option("--truth", eval_truth, "Directory of <stem>.truth.vox1 files")->required();
  evl->add_option("--out", eval_out, "Write report.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    emotion::configure_logging();
    namespace pl = emotion::pipeline;
    if (*gen) {
      const RunConfig c = resolve(gen_flags);
      pl::gen_data(c, fs::path(c.output_dir) / "data", gen_flags.workers.value_or(1));
    } else if (*train) {
      const RunConfig c = resolve(train_flags);
      const fs::path data = train_data.empty() ? fs::path(c.output_dir) / "data" : fs::path(train_data);
      pl::train(c, data, c.output_dir);
    } else if (*smp) {
      const emotion::Checkpoint ckpt = emotion::read_ckpt1(sample_ckpt);
      pl::SampleOptions o;
      o.seed = sample_seed;
      o.switch_step = switch_step;
      o.renoise = renoise;
      o.unguided = unguided;
      const auto outputs = pl::sample_files(ckpt, sample_prompt, sample_out, o);
      if (!render_dir.empty()) {
        for (const auto& [stem, seq] : outputs) emotion::tools::render_frames(seq, render_dir, stem);
      }
    } else if (*aln) {
      const RunConfig c = resolve(align_flags);
      const fs::path data = align_data.empty() ? fs::path(c.output_dir) / "data" : fs::path(align_data);
      pl::align(c, emotion::read_ckpt1(align_ckpt), data, c.output_dir);
    } else if (*evl) {
      const emotion::MetricReport r = pl::evaluate_dirs(eval_pred, eval_truth);
      std::cout << emotion::format_report_table(r);
      if (!eval_out.empty()) {
        fs::create_directories(eval_out);
        std::ofstream(fs::path(eval_out) / "report.json") << nlohmann::json(r).dump(2) << '\n';
      }
    }
  } catch (const emotion::ValidationError& e) {
    report_error(e.kind(), e.what(), {{"field", e.field()}});
    return exit_code(e.kind());
  } catch (const emotion::FormatError& e) {
    report_error(e.kind(), e.what(), {{"offset", e.offset()}});
    return exit_code(e.kind());
  } catch (const emotion::Error& e) {
    report_error(e.kind(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 0;
}
