// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/rounds.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "support/temp_dir.hpp"
#include "wsloc/bootstrap.hpp"
#include "wsloc/error.hpp"
#include "wsloc/filter.hpp"

namespace wsloc {
namespace {

namespace fs = std::filesystem;

struct Fixture {
  SimCorpus sim;
  Corpus corpus;
};

Fixture make_fixture(std::int64_t frames, std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  Fixture f;
  f.sim = generate_corpus(spec, frames);
  f.corpus.registry = f.sim.registry;
  f.corpus.image_size = spec.image_size;
  f.corpus.frames = emulate_corpus(f.sim, DetectorNoise::parts_default());
  f.corpus.captions = f.sim.captions;
  return f;
}

RoundPlan plan_in(const fs::path& dir, int rounds, std::uint64_t seed = 3) {
  RoundPlan p;
  p.rounds = rounds;
  p.seed = seed;
  p.workdir = dir;
  return p;
}

std::vector<RoundManifest> run(const Fixture& f, const RoundPlan& plan, int jobs = 1,
                               std::vector<bool>* reused = nullptr) {
  RunOptions opts;
  opts.jobs = jobs;
  opts.ground_truth = &f.sim.frames;
  opts.on_round = [reused](const RoundManifest&, bool r) {
    if (reused) reused->push_back(r);
  };
  const auto source = make_detector_source(plan, f.corpus, &f.sim.frames);
  return run_plan(plan, f.corpus, *source, opts);
}

TEST(RoundsTest, FourRoundsImproveLabelPrecision) {
  testing::TempDir dir;
  const Fixture f = make_fixture(1500, 1);
  const auto ms = run(f, plan_in(dir.path(), 4));
  ASSERT_EQ(ms.size(), 5u);
  for (int k = 0; k <= 4; ++k) {
    EXPECT_EQ(ms[k].round, k);
    EXPECT_TRUE(fs::exists(round_dir(dir.path(), k) / "manifest.json"));
    EXPECT_EQ(read_manifest(round_dir(dir.path(), k) / "manifest.json"), ms[k]);
    ASSERT_TRUE(ms[k].evaluation && ms[k].evaluation->label_precision);
    EXPECT_TRUE(ms[k].evaluation->model_map.has_value());
  }
  EXPECT_EQ(ms[0].stage, "bootstrap");
  EXPECT_EQ(ms[1].stage, "filter");
  EXPECT_EQ(ms[1].input_digest, ms[0].output_digest);
  EXPECT_GT(*ms[1].evaluation->label_precision, *ms[0].evaluation->label_precision);
  for (int k = 2; k <= 4; ++k) {
    EXPECT_GE(*ms[k].evaluation->label_precision + 1e-9,
              *ms[k - 1].evaluation->label_precision);
  }
}

TEST(RoundsTest, RerunReusesEverything) {
  testing::TempDir dir;
  const Fixture f = make_fixture(400, 2);
  const auto first = run(f, plan_in(dir.path(), 3));
  std::vector<bool> reused;
  const auto second = run(f, plan_in(dir.path(), 3), 1, &reused);
  EXPECT_EQ(first, second);
  EXPECT_EQ(reused, std::vector<bool>(4, true));
}

TEST(RoundsTest, ResumeAfterInterruptMatchesFreshRun) {
  testing::TempDir a, b;
  const Fixture f = make_fixture(400, 3);
  run(f, plan_in(a.path(), 2));
  std::vector<bool> reused;
  const auto resumed = run(f, plan_in(a.path(), 4), 1, &reused);
  EXPECT_EQ(reused, (std::vector<bool>{true, true, true, false, false}));
  const auto fresh = run(f, plan_in(b.path(), 4));
  EXPECT_EQ(resumed, fresh);
  for (int k = 0; k <= 4; ++k) {
    EXPECT_EQ(dataset_digest(round_dir(a.path(), k)), dataset_digest(round_dir(b.path(), k)));
  }
}

TEST(RoundsTest, JobsDoNotChangeResults) {
  testing::TempDir a, b;
  const Fixture f = make_fixture(400, 4);
  EXPECT_EQ(run(f, plan_in(a.path(), 2), 1), run(f, plan_in(b.path(), 2), 4));
}

TEST(RoundsTest, SingleRoundMatchesManualPass) {
  testing::TempDir dir, manual;
  const Fixture f = make_fixture(400, 5);
  const RoundPlan plan = plan_in(dir.path(), 1);
  run(f, plan);

  const auto boot = bootstrap_corpus(f.corpus.frames, f.corpus.captions,
                                     f.corpus.registry, plan.bootstrap_cfg);
  write_pseudo_dataset(boot.records, f.corpus.image_size, manual.path(), f.corpus.registry);
  const auto ds0 = read_pseudo_dataset(manual.path(), f.corpus.image_size);
  const auto source = make_detector_source(plan, f.corpus, &f.sim.frames);
  const auto det = source->train(1, ds0, dataset_digest(manual.path()), manual.path());
  auto frames = f.corpus.frames;
  for (auto& fr : frames) fr.tools = det->detect(fr);
  auto records = filter_corpus(frames, f.corpus.registry, plan.filter_cfg, 1).records;
  for (auto& r : records) {
    for (auto& b : r.entries) b = b.with_confidence(1.0);
  }
  const auto round1 = read_pseudo_dataset(round_dir(dir.path(), 1), f.corpus.image_size);
  testing::TempDir expected;
  write_pseudo_dataset(records, f.corpus.image_size, expected.path(), f.corpus.registry);
  EXPECT_EQ(dataset_digest(expected.path()), dataset_digest(round_dir(dir.path(), 1)));
  EXPECT_EQ(round1.records.size(), records.size());
}

TEST(RoundsTest, ParameterChangeIsStale) {
  testing::TempDir dir;
  const Fixture f = make_fixture(300, 6);
  run(f, plan_in(dir.path(), 2));
  RoundPlan changed = plan_in(dir.path(), 2);
  changed.filter_cfg.tau = 0.7;
  EXPECT_THROW(run(f, changed), StalenessError);
  RoundPlan reseeded = plan_in(dir.path(), 2, 99);
  EXPECT_THROW(run(f, reseeded), StalenessError);
}

TEST(RoundsTest, CorruptedManifestOrDatasetIsIntegrityError) {
  testing::TempDir dir;
  const Fixture f = make_fixture(300, 7);
  run(f, plan_in(dir.path(), 2));
  const fs::path label_dir = round_dir(dir.path(), 1) / "labels";
  ASSERT_FALSE(fs::is_empty(label_dir));
  {
    std::ofstream out(fs::directory_iterator(label_dir)->path(), std::ios::app);
    out << "0 0.5 0.5 0.1 0.1\n";
  }
  EXPECT_THROW(run(f, plan_in(dir.path(), 2)), IntegrityError);

  testing::TempDir dir2;
  run(f, plan_in(dir2.path(), 2));
  {
    std::ofstream out(round_dir(dir2.path(), 2) / "manifest.json", std::ios::trunc);
    out << "{\"round\": 2, ";
  }
  EXPECT_THROW(run(f, plan_in(dir2.path(), 2)), IntegrityError);
}

TEST(RoundsTest, FileDetectorChecksTrainingDigest) {
  testing::TempDir dir;
  const Fixture f = make_fixture(200, 8);
  RoundPlan plan = plan_in(dir.path(), 1);
  plan.detector = "file";
  const auto source = make_detector_source(plan, f.corpus, nullptr);
  EXPECT_EQ(source->name(), "file");
  // Round 1 input is missing.
  EXPECT_THROW(run_plan(plan, f.corpus, *source), InputError);
  const RoundManifest m0 = read_manifest(round_dir(dir.path(), 0) / "manifest.json");

  // Perfect detections, declared as trained on round 0.
  std::vector<FrameDetections> dets = f.corpus.frames;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    dets[i].tools.clear();
    for (const auto& inst : f.sim.frames[i].instruments) {
      dets[i].tools.push_back(inst.tool_box.with_confidence(0.9));
    }
  }
  const fs::path path = round_dir(dir.path(), 1) / "detections.jsonl";
  write_detections(path, dets, f.corpus.registry, std::string("sha256:bogus"));
  EXPECT_THROW(run_plan(plan, f.corpus, *source), StalenessError);
  write_detections(path, dets, f.corpus.registry);
  EXPECT_THROW(run_plan(plan, f.corpus, *source), StalenessError);

  write_detections(path, dets, f.corpus.registry, m0.output_digest);
  RunOptions opts;
  opts.ground_truth = &f.sim.frames;
  const auto ms = run_plan(plan, f.corpus, *source, opts);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[1].detector, "file");
  EXPECT_GT(ms[1].frames_accepted, 0);
  EXPECT_EQ(*ms[1].evaluation->label_precision, 1.0);
  EXPECT_FALSE(ms[1].evaluation->model_map.has_value());
}

TEST(RoundsTest, SurrogateNeedsGroundTruth) {
  const Fixture f = make_fixture(50, 9);
  EXPECT_THROW(make_detector_source(plan_in("x", 1), f.corpus, nullptr), ConfigError);
}

TEST(RoundsTest, DetectorNameMustMatchPlan) {
  testing::TempDir dir;
  const Fixture f = make_fixture(50, 10);
  const FileDetectorSource file(f.corpus.registry);
  EXPECT_THROW(run_plan(plan_in(dir.path(), 1), f.corpus, file), ConfigError);
}

TEST(RoundPlanTest, JsonRoundTripAndValidation) {
  RoundPlan p = plan_in("work", 3, 11);
  p.filter_cfg.tau = 0.6;
  p.detector = "file";
  const RoundPlan back = round_plan_from_json(to_json(p));
  EXPECT_EQ(back.rounds, 3);
  EXPECT_EQ(back.filter_cfg, p.filter_cfg);
  EXPECT_EQ(back.detector, "file");
  EXPECT_EQ(back.seed, 11u);
  EXPECT_EQ(back.workdir, fs::path("work"));
  RoundPlan bad = p;
  bad.rounds = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = p;
  bad.detector = "yolo";
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(CorpusDigestTest, SensitiveToContent) {
  const Fixture f = make_fixture(60, 12);
  Corpus c = f.corpus;
  const std::string d = corpus_digest(c);
  EXPECT_EQ(d, corpus_digest(f.corpus));
  std::reverse(c.frames.begin(), c.frames.end());
  EXPECT_EQ(corpus_digest(c), d);
  c.frames.pop_back();
  EXPECT_NE(corpus_digest(c), d);
}

}  // namespace
}  // namespace wsloc
