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

#include <filesystem>
#include <fstream>
#include <map>

#include "emotion/core/binary_io.hpp"
#include "emotion/core/error.hpp"
#include "emotion/harness/config.hpp"
#include "emotion/harness/pipeline.hpp"

namespace emotion {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("emotion_harness_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

RunConfig smoke() {
  return parse_run_config(nlohmann::json::parse(R"({
    "seed": 7,
    "suite": {"count": 6, "height": 32, "width": 32, "duration_us": 240000},
    "heldout": 2,
    "schedule": {"steps": 10},
    "denoiser": {"hidden": 8, "layers": 3},
    "training": {"iterations": 20, "batch": 4, "log_every": 5},
    "alignment": {"pool_size": 4, "batch": 4, "prompts": 2}
  })"));
}

std::string field_of(const nlohmann::json& j) {
  try {
    RunConfig c = parse_run_config(j);
    validate(c);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

std::map<std::string, std::uint64_t> tree_hashes(const fs::path& root) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = io::fnv1a64(io::read_file(e.path()));
  }
  return out;
}

TEST(RunConfig, DefaultsValidateAndResolveSwitchStep) {
  RunConfig c;
  validate(c);
  EXPECT_EQ(c.switch_step, 15);
  EXPECT_EQ(c.suite.count, 200);
  EXPECT_EQ(c.training_scenes(), 150);
  EXPECT_EQ(c.clip_start(), 110000);
  EXPECT_EQ(c.align_config().batch, 64u);
  EXPECT_TRUE(c.align_config().sampler.renoise);
}

TEST(RunConfig, UnknownKeysAndWrongTypesNameTheField) {
  EXPECT_EQ(field_of(nlohmann::json{{"sed", 1}}), "sed");
  EXPECT_EQ(field_of(nlohmann::json{{"training", {{"batchsize", 3}}}}), "training.batchsize");
  EXPECT_EQ(field_of(nlohmann::json{{"seed", "abc"}}), "seed");
  EXPECT_EQ(field_of(nlohmann::json{{"alignment", {{"reward", {{"ssim", "x"}}}}}}), "alignment.reward.ssim");
  EXPECT_EQ(field_of(nlohmann::json{{"schedule", 3}}), "schedule");
}

TEST(RunConfig, ValidationNamesTheField) {
  EXPECT_EQ(field_of(nlohmann::json{{"heldout", 0}}), "heldout");
  EXPECT_EQ(field_of(nlohmann::json{{"training", {{"batch", 6}, {"accumulation", 4}}}}),
            "training.accumulation");
  EXPECT_EQ(field_of(nlohmann::json{{"alignment", {{"clip", 1.5}}}}), "alignment.clip");
  EXPECT_EQ(field_of(nlohmann::json{{"alignment", {{"batch", 65}}}}), "alignment.batch");
  EXPECT_EQ(field_of(nlohmann::json{{"sampler", {{"switch_step", 99}}}}), "sampler.switch_step");
  EXPECT_EQ(field_of(nlohmann::json{{"schedule", {{"sigma_min", 20.0}}}}), "schedule");
  EXPECT_EQ(field_of(nlohmann::json{{"suite", {{"duration_us", 60000}}}}), "representation.clip_start_us");
}

TEST(RunConfig, EffectiveDumpRoundTrips) {
  RunConfig c = smoke();
  validate(c);
  const nlohmann::json dump = to_json(c);
  RunConfig back = parse_run_config(dump);
  validate(back);
  EXPECT_EQ(to_json(back), dump);
  EXPECT_EQ(dump["sampler"]["switch_step"], 3);
  EXPECT_EQ(dump["representation"]["clip_start_us"], c.clip_start());
}

TEST(RunConfig, MalformedJsonReportsOffset) {
  TempDir dir;
  const fs::path p = dir.path() / "bad.json";
  std::ofstream(p) << "{\"seed\": 3,, }";
  try {
    load_run_config(p);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 12u);
  }
  EXPECT_THROW(load_run_config(dir.path() / "missing.json"), DataError);
}

TEST(Pipeline, GenDataWritesSuiteAndHeldOutClips) {
  TempDir dir;
  RunConfig c = smoke();
  validate(c);
  pipeline::gen_data(c, dir.path(), 1);
  for (int i = 0; i < 6; ++i) {
    const std::string stem = pipeline::scene_stem(i);
    EXPECT_TRUE(fs::exists(dir.path() / (stem + ".json")));
    const EventStream s = read_evt1(dir.path() / (stem + ".evt1"));
    EXPECT_EQ(s.duration_us, 240000u);
    EXPECT_FALSE(s.events.empty());
    EXPECT_EQ(read_msk1(dir.path() / (stem + ".msk1")).size(), 12u);
  }
  for (int i = 4; i < 6; ++i) {
    const fs::path h = dir.path() / "heldout";
    const std::string stem = pipeline::clip_stem(i);
    const VoxelSequence prompt = read_vox1(h / (stem + ".prompt.vox1"));
    const VoxelSequence truth = read_vox1(h / (stem + ".truth.vox1"));
    EXPECT_EQ(prompt.frames, 4);
    EXPECT_EQ(truth.frames, 1);
    EXPECT_EQ(truth.window_us, 20000u);
    EXPECT_EQ(prompt.window_us, 20000u);
    EXPECT_EQ(read_msk1(h / (stem + ".mask.msk1")).size(), 1u);
  }
  EXPECT_FALSE(fs::exists(dir.path() / "heldout" / "clip_0003.prompt.vox1"));
  std::ifstream in(dir.path() / "manifest.json");
  const nlohmann::json manifest = nlohmann::json::parse(in);
  EXPECT_EQ(manifest["training"].size(), 4u);
  EXPECT_EQ(manifest["heldout"].size(), 2u);
}

TEST(Pipeline, GenDataIsIndependentOfWorkerCount) {
  TempDir dir;
  RunConfig c = smoke();
  validate(c);
  pipeline::gen_data(c, dir.path() / "one", 1);
  pipeline::gen_data(c, dir.path() / "three", 3);
  EXPECT_EQ(tree_hashes(dir.path() / "one"), tree_hashes(dir.path() / "three"));
}

TEST(Pipeline, SelfEvaluationIsPerfect) {
  TempDir dir;
  RunConfig c = smoke();
  validate(c);
  pipeline::gen_data(c, dir.path() / "data", 1);
  const fs::path truth = dir.path() / "truth", pred = dir.path() / "pred";
  fs::create_directories(truth);
  fs::create_directories(pred);
  for (const auto& e : fs::directory_iterator(dir.path() / "data" / "heldout")) {
    const std::string name = e.path().filename().string();
    if (!pipeline::ends_with(name, pipeline::kTruthSuffix)) continue;
    fs::copy_file(e.path(), truth / name);
    fs::copy_file(e.path(), pred / (pipeline::stem_of(e.path()) + ".vox1"));
  }
  const MetricReport r = pipeline::evaluate_dirs(pred, truth);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_NEAR(r.ssim, 1.0, 1e-9);
  EXPECT_NEAR(r.feature_video_distance, 0.0, 1e-6);
  EXPECT_EQ(r.miou, 1.0);
  fs::remove(pred / "clip_0005.vox1");
  EXPECT_THROW(pipeline::evaluate_dirs(pred, truth), DataError);
}

TEST(Pipeline, UnguidedSamplingMatchesDegenerateGuidance) {
  TempDir dir;
  RunConfig c = smoke();
  c.training.iterations = 3;
  validate(c);
  pipeline::gen_data(c, dir.path() / "data", 1);
  const Checkpoint ckpt = pipeline::train(c, dir.path() / "data", dir.path());
  const fs::path prompts = dir.path() / "data" / "heldout";
  pipeline::SampleOptions guided;
  guided.seed = 9;
  guided.switch_step = c.schedule.steps + 1;
  pipeline::SampleOptions unguided;
  unguided.seed = 9;
  unguided.unguided = true;
  pipeline::sample_files(ckpt, prompts, dir.path() / "a", guided);
  pipeline::sample_files(ckpt, prompts, dir.path() / "b", unguided);
  const auto a = tree_hashes(dir.path() / "a"), b = tree_hashes(dir.path() / "b");
  EXPECT_EQ(a.size(), 2u);
  EXPECT_EQ(a, b);
  pipeline::SampleOptions normal;
  normal.seed = 9;
  pipeline::sample_files(ckpt, prompts, dir.path() / "c", normal);
  EXPECT_NE(tree_hashes(dir.path() / "c"), a);
}

TEST(Pipeline, TrainingIsDeterministic) {
  TempDir dir;
  RunConfig c = smoke();
  c.training.iterations = 4;
  validate(c);
  pipeline::gen_data(c, dir.path() / "data", 1);
  pipeline::train(c, dir.path() / "data", dir.path() / "r1");
  pipeline::train(c, dir.path() / "data", dir.path() / "r2");
  EXPECT_EQ(tree_hashes(dir.path() / "r1"), tree_hashes(dir.path() / "r2"));
  c.seed = 8;
  pipeline::train(c, dir.path() / "data", dir.path() / "r3");
  EXPECT_NE(io::fnv1a64(io::read_file(dir.path() / "r1" / "model.ckpt1")),
            io::fnv1a64(io::read_file(dir.path() / "r3" / "model.ckpt1")));
}

}  // namespace
}  // namespace emotion
