// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/bootstrap.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "wsloc/error.hpp"
#include "wsloc/eval.hpp"
#include "wsloc/sim.hpp"

namespace wsloc {
namespace {

// 0..2 regular, 3 special.
ClassRegistry reg() {
  return ClassRegistry::build({"needle driver", "bipolar forceps", "vessel sealer",
                               "stapler"});
}

PartDetection part(double cx, PartKind kind, double conf = 0.9, double cy = 50) {
  return {box_from_center(cx, cy, 8, 8, conf), kind};
}

FrameDetections frame(std::vector<PartDetection> parts, std::int64_t index = 0) {
  FrameDetections f;
  f.clip_id = "clip";
  f.frame_index = index;
  f.parts = std::move(parts);
  return f;
}

const ClipCaption kCaptionABC{"clip", {0, 1, 2}};

TEST(AnchorBoxesTest, ThreeConfidentClevises) {
  const auto f = frame({part(10, PartKind::kClevis), part(50, PartKind::kClevis),
                        part(90, PartKind::kClevis)});
  EXPECT_EQ(anchor_boxes(f, kCaptionABC, reg(), {}).size(), 3u);
}

TEST(AnchorBoxesTest, ShaftsNeverAnchor) {
  const auto f = frame({part(10, PartKind::kClevis), part(50, PartKind::kClevis),
                        part(10, PartKind::kShaft), part(30, PartKind::kShaft),
                        part(50, PartKind::kShaft), part(70, PartKind::kShaft)});
  EXPECT_EQ(anchor_boxes(f, kCaptionABC, reg(), {}).size(), 2u);
}

TEST(AnchorBoxesTest, LowConfidenceExcluded) {
  const auto f = frame({part(10, PartKind::kClevis, 0.1),
                        part(50, PartKind::kClevis, 0.25),
                        part(90, PartKind::kClevis)});
  EXPECT_EQ(anchor_boxes(f, kCaptionABC, reg(), {}).size(), 2u);
}

TEST(AnchorBoxesTest, AllSpecialCaptionUsesTips) {
  const auto r = ClassRegistry::build({"stapler", "suction irrigator"});
  const auto f = frame({part(10, PartKind::kClevis), part(12, PartKind::kTip),
                        part(50, PartKind::kClevis), part(52, PartKind::kTip)});
  const auto anchors = anchor_boxes(f, {"clip", {0, 1}}, r, {});
  ASSERT_EQ(anchors.size(), 2u);
  EXPECT_DOUBLE_EQ(anchors[0].center_x(), 12);
}

TEST(AnchorBoxesTest, MixedCaptionSwapsSpecialSlotToNearestTip) {
  // Caption [needle driver, stapler, vessel sealer]: the middle slot is special.
  const auto f = frame({part(10, PartKind::kClevis), part(50, PartKind::kClevis),
                        part(90, PartKind::kClevis), part(11, PartKind::kTip, 0.9, 44),
                        part(52, PartKind::kTip, 0.9, 44), part(88, PartKind::kTip, 0.9, 44)});
  const auto anchors = anchor_boxes(f, {"clip", {0, 3, 2}}, reg(), {});
  ASSERT_EQ(anchors.size(), 3u);
  EXPECT_DOUBLE_EQ(anchors[0].center_x(), 10);
  EXPECT_DOUBLE_EQ(anchors[1].center_x(), 52);
  EXPECT_DOUBLE_EQ(anchors[1].center_y(), 44);
  EXPECT_DOUBLE_EQ(anchors[2].center_x(), 90);
}

TEST(AnchorBoxesTest, MixedCaptionWithoutTipDropsSlot) {
  const auto f = frame({part(10, PartKind::kClevis), part(50, PartKind::kClevis),
                        part(90, PartKind::kClevis)});
  EXPECT_EQ(anchor_boxes(f, {"clip", {0, 3, 2}}, reg(), {}).size(), 2u);
}

TEST(AnchorBoxesTest, ClevisOnlyRule) {
  BootstrapConfig cfg;
  cfg.anchor_rule = AnchorRule::kClevisOnly;
  const auto r = ClassRegistry::build({"stapler", "suction irrigator", "grasping retractor"});
  const auto f = frame({part(10, PartKind::kClevis), part(50, PartKind::kClevis),
                        part(90, PartKind::kClevis), part(12, PartKind::kTip)});
  EXPECT_EQ(anchor_boxes(f, {"clip", {0, 1, 2}}, r, cfg).size(), 3u);
}

TEST(BootstrapFrameTest, SortedAnchorsGetCaptionOrder) {
  const auto f = frame({part(90, PartKind::kClevis), part(10, PartKind::kClevis),
                        part(50, PartKind::kClevis)});
  const auto rec = bootstrap_frame(f, kCaptionABC, reg(), {});
  ASSERT_TRUE(rec);
  ASSERT_EQ(rec->entries.size(), 3u);
  EXPECT_DOUBLE_EQ(rec->entries[0].center_x(), 10);
  EXPECT_EQ(rec->entries[0].label(), 0);
  EXPECT_DOUBLE_EQ(rec->entries[1].center_x(), 50);
  EXPECT_EQ(rec->entries[1].label(), 1);
  EXPECT_DOUBLE_EQ(rec->entries[2].center_x(), 90);
  EXPECT_EQ(rec->entries[2].label(), 2);
  EXPECT_EQ(rec->provenance.round, 0);
  EXPECT_FALSE(rec->provenance.tau.has_value());
}

TEST(BootstrapFrameTest, AlreadySortedIsIdentity) {
  const auto f = frame({part(10, PartKind::kClevis), part(50, PartKind::kClevis),
                        part(90, PartKind::kClevis)});
  const auto rec = bootstrap_frame(f, kCaptionABC, reg(), {});
  ASSERT_TRUE(rec);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(rec->entries[static_cast<std::size_t>(i)],
              f.parts[static_cast<std::size_t>(i)].box.with_label(i));
  }
}

TEST(BootstrapFrameTest, SkipReasons) {
  const auto two = frame({part(10, PartKind::kClevis), part(50, PartKind::kClevis)});
  EXPECT_EQ(std::get<SkipReason>(bootstrap_frame_outcome(two, kCaptionABC, reg(), {})),
            SkipReason::kWrongAnchorCount);
  EXPECT_EQ(std::get<SkipReason>(
                bootstrap_frame_outcome(two, {"clip", {0, 1}}, reg(), {})),
            SkipReason::kCaptionLengthMismatch);
  const auto faint = frame({part(10, PartKind::kClevis, 0.1)});
  EXPECT_EQ(std::get<SkipReason>(bootstrap_frame_outcome(faint, kCaptionABC, reg(), {})),
            SkipReason::kLowConfidenceOnly);
  const auto nothing = frame({part(10, PartKind::kShaft)});
  EXPECT_EQ(std::get<SkipReason>(bootstrap_frame_outcome(nothing, kCaptionABC, reg(), {})),
            SkipReason::kWrongAnchorCount);
}

TEST(BootstrapFrameTest, PermutationEquivariant) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> x(0, 1000);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PartDetection> parts;
    for (int i = 0; i < 3; ++i) parts.push_back(part(x(rng), PartKind::kClevis));
    parts.push_back(part(x(rng), PartKind::kShaft));
    const auto base = bootstrap_frame(frame(parts), kCaptionABC, reg(), {});
    std::shuffle(parts.begin(), parts.end(), rng);
    EXPECT_EQ(bootstrap_frame(frame(parts), kCaptionABC, reg(), {}), base);
  }
}

TEST(BootstrapCorpusTest, CountsAndCanonicalOrder) {
  std::vector<FrameDetections> frames;
  // Frames 9, 7, 5, 3 have three anchors; the others two.
  for (int i = 9; i >= 0; --i) {
    std::vector<PartDetection> parts = {part(10, PartKind::kClevis),
                                        part(50, PartKind::kClevis)};
    if (i % 2 == 1 && i > 1) parts.push_back(part(90, PartKind::kClevis));
    frames.push_back(frame(parts, i));
  }
  CaptionMap caps;
  caps["clip"] = kCaptionABC;
  const auto result = bootstrap_corpus(frames, caps, reg(), {}, 3);
  EXPECT_EQ(result.records.size(), 4u);
  EXPECT_EQ(result.stats.frames_seen, 10);
  EXPECT_EQ(result.stats.frames_accepted, 4);
  EXPECT_EQ(result.stats.skipped(SkipReason::kWrongAnchorCount), 6);
  EXPECT_EQ(result.records.front().frame_index, 3);
  EXPECT_EQ(result.records.back().frame_index, 9);
  EXPECT_EQ(bootstrap_corpus(frames, caps, reg(), {}, 1).records, result.records);
}

TEST(BootstrapCorpusTest, EmptyAndMissingCaption) {
  const auto result = bootstrap_corpus({}, {}, reg(), {});
  EXPECT_TRUE(result.records.empty());
  EXPECT_EQ(result.stats, BootstrapStats{});
  const std::vector<FrameDetections> frames = {frame({})};
  try {
    bootstrap_corpus(frames, {}, reg(), {});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("clip"), std::string::npos);
  }
}

TEST(BootstrapSimTest, NoCrossingMeansPerfectLabels) {
  SceneSpec spec;
  spec.seed = 21;
  spec.crossing_prob = 0.0;
  const SimCorpus corpus = generate_corpus(spec, 400);
  const auto frames = emulate_corpus(corpus, DetectorNoise::parts_default());
  const auto result = bootstrap_corpus(frames, corpus.captions, corpus.registry, {});
  ASSERT_GT(result.records.size(), 300u);
  for (const auto& r : result.records) EXPECT_EQ(r.entries.size(), 3u);
  const auto q = label_quality(result.records, ground_truth_eval_frames(corpus.frames),
                               corpus.registry.size());
  EXPECT_EQ(q.precision, 1.0);
}

TEST(BootstrapSimTest, CrossingMakesLabelsNoisy) {
  SceneSpec spec;
  spec.seed = 22;
  spec.crossing_prob = 0.3;
  const SimCorpus corpus = generate_corpus(spec, 400);
  const auto frames = emulate_corpus(corpus, DetectorNoise::parts_default());
  const auto result = bootstrap_corpus(frames, corpus.captions, corpus.registry, {});
  const auto q = label_quality(result.records, ground_truth_eval_frames(corpus.frames),
                               corpus.registry.size());
  ASSERT_TRUE(q.precision);
  EXPECT_LT(*q.precision, 0.95);
}

}  // namespace
}  // namespace wsloc
