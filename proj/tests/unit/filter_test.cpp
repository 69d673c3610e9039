// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/filter.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles/alg1_bruteforce.hpp"
#include "support/random_frames.hpp"
#include "wsloc/bootstrap.hpp"
#include "wsloc/error.hpp"
#include "wsloc/eval.hpp"
#include "wsloc/sim.hpp"

namespace wsloc {
namespace {

// 0 regular, 1 special.
ClassRegistry reg() { return ClassRegistry::build({"needle driver", "stapler"}); }

FrameDetections make_frame(std::vector<PartDetection> parts, std::vector<Box2D> tools) {
  FrameDetections f;
  f.clip_id = "c";
  f.frame_index = 0;
  f.parts = std::move(parts);
  f.tools = std::move(tools);
  return f;
}

TEST(MatchCountTest, RegularToolMatchesClevis) {
  // IOU((0,0,10,10), (0,0,9,10)) = 0.9.
  const std::vector<PartDetection> parts = {{Box2D(0, 0, 9, 10), PartKind::kClevis}};
  EXPECT_EQ(match_count(Box2D(0, 0, 10, 10, 1, 0), parts, reg(), {}), 1);
}

TEST(MatchCountTest, SpecialToolIgnoresClevis) {
  const std::vector<PartDetection> parts = {{Box2D(0, 0, 10, 10), PartKind::kClevis}};
  EXPECT_EQ(match_count(Box2D(0, 0, 10, 10, 1, 1), parts, reg(), {}), 0);
  const std::vector<PartDetection> tips = {{Box2D(0, 0, 10, 10), PartKind::kTip}};
  EXPECT_EQ(match_count(Box2D(0, 0, 10, 10, 1, 1), tips, reg(), {}), 1);
}

TEST(MatchCountTest, ExactlyTauDoesNotMatch) {
  // IOU((0,0,10,10), (0,0,8,10)) = 0.8 exactly.
  const std::vector<PartDetection> parts = {{Box2D(0, 0, 8, 10), PartKind::kClevis}};
  EXPECT_EQ(iou(parts[0].box, Box2D(0, 0, 10, 10)), 0.8);
  EXPECT_EQ(match_count(Box2D(0, 0, 10, 10, 1, 0), parts, reg(), {}), 0);
}

TEST(MatchCountTest, LiteralCountsEveryPart) {
  const std::vector<PartDetection> parts = {{Box2D(0, 0, 10, 10), PartKind::kTip},
                                            {Box2D(0, 0, 9.5, 10), PartKind::kTip}};
  FilterConfig literal;
  literal.match_mode = MatchMode::kLiteral;
  EXPECT_EQ(match_count(Box2D(0, 0, 10, 10, 1, 1), parts, reg(), literal), 2);
  EXPECT_EQ(match_count(Box2D(0, 0, 10, 10, 1, 1), parts, reg(), {}), 1);
}

TEST(MatchCountTest, IntersectionOverMinMetric) {
  FilterConfig cfg;
  cfg.overlap_metric = OverlapMetric::kIntersectionOverMin;
  const std::vector<PartDetection> parts = {{Box2D(2, 2, 4, 4), PartKind::kClevis}};
  EXPECT_EQ(match_count(Box2D(0, 0, 10, 10, 1, 0), parts, reg(), cfg), 1);
  EXPECT_EQ(match_count(Box2D(0, 0, 10, 10, 1, 0), parts, reg(), {}), 0);
}

TEST(FilterFrameTest, BothToolsMatched) {
  const auto f = make_frame({{Box2D(0, 0, 10, 10), PartKind::kClevis},
                             {Box2D(50, 0, 60, 10), PartKind::kTip}},
                            {Box2D(0, 0, 10, 10, 0.9, 0), Box2D(50, 0, 60, 10, 0.9, 1)});
  const auto rec = filter_frame(f, reg(), {}, 3);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->entries, f.tools);
  EXPECT_EQ(rec->provenance.round, 3);
  EXPECT_EQ(rec->provenance.tau, 0.8);
}

TEST(FilterFrameTest, OneOfTwoMatchedIsRejected) {
  const auto f = make_frame({{Box2D(0, 0, 10, 10), PartKind::kClevis}},
                            {Box2D(0, 0, 10, 10, 0.9, 0), Box2D(50, 0, 60, 10, 0.9, 1)});
  EXPECT_EQ(std::get<RejectReason>(filter_frame_outcome(f, reg(), {})),
            RejectReason::kCountMismatch);
}

TEST(FilterFrameTest, LiteralOvercountRejectsCappedAccepts) {
  const auto f = make_frame({{Box2D(0, 0, 10, 10), PartKind::kTip},
                             {Box2D(0, 0, 9.5, 10), PartKind::kTip}},
                            {Box2D(0, 0, 10, 10, 0.9, 1)});
  FilterConfig literal;
  literal.match_mode = MatchMode::kLiteral;
  EXPECT_FALSE(filter_frame(f, reg(), literal));
  EXPECT_TRUE(filter_frame(f, reg(), {}));
}

TEST(FilterFrameTest, RejectionReasons) {
  const auto none = make_frame({{Box2D(0, 0, 10, 10), PartKind::kClevis}}, {});
  EXPECT_EQ(std::get<RejectReason>(filter_frame_outcome(none, reg(), {})),
            RejectReason::kNoTools);
  const auto faint = make_frame({{Box2D(0, 0, 10, 10), PartKind::kClevis}},
                                {Box2D(0, 0, 10, 10, 0.1, 0)});
  EXPECT_EQ(std::get<RejectReason>(filter_frame_outcome(faint, reg(), {})),
            RejectReason::kLowConfidenceEmpty);
}

TEST(FilterFrameTest, LowConfidenceToolsDroppedBeforeCounting) {
  const auto f = make_frame({{Box2D(0, 0, 10, 10), PartKind::kClevis}},
                            {Box2D(0, 0, 10, 10, 0.9, 0), Box2D(50, 0, 60, 10, 0.2, 1)});
  const auto rec = filter_frame(f, reg(), {});
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->entries.size(), 1u);
}

TEST(FilterFrameTest, UnregisteredClassThrows) {
  const auto f = make_frame({}, {Box2D(0, 0, 10, 10, 0.9, 7)});
  EXPECT_THROW(filter_frame(f, reg(), {}), RegistryError);
}

TEST(FilterOracleTest, LiteralModeMatchesBruteForce) {
  std::mt19937_64 rng(101);
  const auto registry = testing::mixed_registry();
  FilterConfig cfg;
  cfg.match_mode = MatchMode::kLiteral;
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto f = testing::random_filter_frame(rng, registry, i);
    const bool expected = oracle::alg1_accepts(
        testing::raw_parts(f), testing::raw_tools(f, registry), cfg.tau,
        cfg.min_tool_confidence);
    ASSERT_EQ(filter_frame(f, registry, cfg).has_value(), expected) << i;
    accepted += expected ? 1 : 0;
  }
  EXPECT_GT(accepted, 50);
  EXPECT_LT(accepted, 950);
}

TEST(FilterPropertyTest, PermutationInvariance) {
  std::mt19937_64 rng(7);
  const auto registry = testing::mixed_registry();
  for (MatchMode mode : {MatchMode::kCapped, MatchMode::kLiteral}) {
    FilterConfig cfg;
    cfg.match_mode = mode;
    for (int i = 0; i < 500; ++i) {
      auto f = testing::random_filter_frame(rng, registry, i);
      const bool before = filter_frame(f, registry, cfg).has_value();
      std::shuffle(f.parts.begin(), f.parts.end(), rng);
      std::shuffle(f.tools.begin(), f.tools.end(), rng);
      EXPECT_EQ(filter_frame(f, registry, cfg).has_value(), before);
    }
  }
}

TEST(FilterPropertyTest, ModesAgreeWithoutDoubleOverlap) {
  std::mt19937_64 rng(9);
  const auto registry = testing::mixed_registry();
  FilterConfig capped, literal;
  literal.match_mode = MatchMode::kLiteral;
  for (int i = 0; i < 1000; ++i) {
    const auto f = testing::random_filter_frame(rng, registry, i);
    bool double_overlap = false;
    for (const Box2D& t : f.tools) {
      if (match_count(t, f.parts, registry, literal) > 1) double_overlap = true;
    }
    if (double_overlap) continue;
    EXPECT_EQ(filter_frame(f, registry, capped).has_value(),
              filter_frame(f, registry, literal).has_value());
  }
}

TEST(FilterPropertyTest, TauMonotone) {
  std::mt19937_64 rng(12);
  const auto registry = testing::mixed_registry();
  std::vector<FrameDetections> frames;
  for (int i = 0; i < 800; ++i) frames.push_back(testing::random_filter_frame(rng, registry, i));
  std::set<std::int64_t> previous;
  bool first = true;
  for (double tau : {0.5, 0.6, 0.7, 0.8, 0.9}) {
    FilterConfig cfg;
    cfg.tau = tau;
    std::set<std::int64_t> accepted;
    for (const auto& r : filter_corpus(frames, registry, cfg).records) {
      accepted.insert(r.frame_index);
    }
    if (!first) {
      EXPECT_TRUE(std::includes(previous.begin(), previous.end(), accepted.begin(),
                                accepted.end()));
    }
    previous = accepted;
    first = false;
  }
}

TEST(FilterCorpusTest, StatsAndDeterminism) {
  std::mt19937_64 rng(13);
  const auto registry = testing::mixed_registry();
  std::vector<FrameDetections> frames;
  for (int i = 0; i < 300; ++i) frames.push_back(testing::random_filter_frame(rng, registry, 299 - i));
  const auto one = filter_corpus(frames, registry, {}, 1, 1);
  const auto many = filter_corpus(frames, registry, {}, 1, 4);
  EXPECT_EQ(one.records, many.records);
  EXPECT_EQ(one.stats, many.stats);
  EXPECT_EQ(one.stats.frames_seen, 300);
  EXPECT_EQ(one.stats.frames_accepted, static_cast<std::int64_t>(one.records.size()));
  std::int64_t rejected = 0;
  for (RejectReason r : kAllRejectReasons) rejected += one.stats.rejected(r);
  EXPECT_EQ(rejected + one.stats.frames_accepted, 300);
  EXPECT_TRUE(std::is_sorted(one.records.begin(), one.records.end(),
                             [](const auto& a, const auto& b) { return a.key() < b.key(); }));
  std::int64_t boxes = 0;
  for (const auto& r : one.records) boxes += static_cast<std::int64_t>(r.entries.size());
  std::int64_t counted = 0;
  for (auto c : one.stats.per_class_counts) counted += c;
  EXPECT_EQ(counted, boxes);
}

TEST(FilterCorpusTest, EmptyAndSaturated) {
  const auto empty = filter_corpus({}, reg(), {});
  EXPECT_EQ(empty.stats.frames_seen, 0);
  EXPECT_TRUE(empty.records.empty());
  std::vector<FrameDetections> frames;
  for (int i = 0; i < 5; ++i) {
    auto f = make_frame({{Box2D(0, 0, 10, 10), PartKind::kClevis}},
                        {Box2D(0, 0, 10, 10, 0.9, 0)});
    f.frame_index = i;
    frames.push_back(f);
  }
  const auto all = filter_corpus(frames, reg(), {});
  EXPECT_EQ(all.stats.frames_accepted, all.stats.frames_seen);
}

// Tools from a label-noisy emulator: filtering must not lower label precision.
TEST(FilterSimTest, AcceptedFramesAreNoLessPrecise) {
  for (double p : {0.0, 0.1, 0.3}) {
    SceneSpec spec;
    spec.seed = 31;
    spec.crossing_prob = p;
    const SimCorpus corpus = generate_corpus(spec, 1000);
    auto frames = emulate_corpus(corpus, DetectorNoise::parts_default());
    const auto boot =
        bootstrap_corpus(frames, corpus.captions, corpus.registry, {});
    const GroundTruthIndex index(corpus.frames);
    SurrogateOptions opts;
    opts.seed = 31;
    const auto det = surrogate_train(boot.records, index, corpus.registry, opts);
    std::vector<PseudoLabelRecord> all;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      frames[i].tools = det.infer(corpus.frames[i]);
      all.push_back({frames[i].clip_id, frames[i].frame_index, frames[i].tools, {}});
    }
    const auto filtered = filter_corpus(frames, corpus.registry, {});
    const auto gt = ground_truth_eval_frames(corpus.frames);
    const auto before = label_quality(all, gt, corpus.registry.size());
    const auto after = label_quality(filtered.records, gt, corpus.registry.size());
    ASSERT_TRUE(before.precision && after.precision);
    EXPECT_GE(*after.precision, *before.precision) << p;
  }
}

}  // namespace
}  // namespace wsloc
