// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pseudo-label quality against ground truth, and COCO-style detection mAP.
//
// Conventions: detection matching is greedy by descending confidence (ties by
// input order) and accepts IOU >= threshold; AP uses 101-point interpolation
// of the precision envelope. Label quality counts a pseudo-label correct only
// for IOU strictly above its threshold and an equal class.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wsloc/geometry.hpp"
#include "wsloc/model.hpp"

namespace wsloc {

struct EvalFrame {
  FrameKey key;
  std::vector<Box2D> boxes;  // labels are class ids
};

std::vector<EvalFrame> eval_frames_from_tools(
    std::span<const FrameDetections> frames);
std::vector<EvalFrame> eval_frames_from_records(
    std::span<const PseudoLabelRecord> records);

enum class IouComparison { kAtLeast, kGreaterThan };

struct Match {
  std::size_t prediction = 0;
  std::size_t ground_truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<Match> matches;
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_ground_truths;
};

// Class-aware one-to-one matching within a frame. Predictions are visited by
// descending confidence, ties by index; each takes the unmatched ground truth
// of the same class with the highest IOU that passes the threshold.
MatchResult greedy_match(std::span<const Box2D> predictions,
                         std::span<const Box2D> ground_truths,
                         double iou_thresh,
                         IouComparison comparison = IouComparison::kAtLeast);

struct ClassQuality {
  int class_id = 0;
  std::int64_t emitted = 0;       // pseudo-labels carrying this class
  std::int64_t correct = 0;
  std::int64_t ground_truth = 0;  // true instances of this class
};

struct LabelQuality {
  std::optional<double> precision;  // null when nothing was emitted
  double recall = 0.0;
  std::int64_t emitted = 0;
  std::int64_t correct = 0;
  std::int64_t ground_truth = 0;
  // Records whose frame is absent from the ground truth. They still count as
  // emitted.
  std::int64_t uncovered_frames = 0;
  std::vector<ClassQuality> per_class;
};

LabelQuality label_quality(std::span<const PseudoLabelRecord> records,
                           std::span<const EvalFrame> ground_truth,
                           std::size_t num_classes, double iou_thresh = 0.5);

// 0.50, 0.55, ..., 0.95.
std::array<double, 10> coco_iou_thresholds();

// AP for one class at one IOU threshold; nullopt when the class has no ground
// truth instance.
std::optional<double> average_precision(std::span<const EvalFrame> predictions,
                                        std::span<const EvalFrame> ground_truth,
                                        int class_id, double iou_thresh);

struct MapReport {
  double map = 0.0;
  std::map<int, double> per_class;  // AP averaged over thresholds
  std::vector<std::pair<double, double>> per_threshold;  // (threshold, mAP)
};

// Classes without ground truth are excluded. Throws EvalError when no class
// has ground truth.
MapReport evaluate_map(std::span<const EvalFrame> predictions,
                       std::span<const EvalFrame> ground_truth,
                       std::span<const double> thresholds, int jobs = 1);

double map_range(std::span<const EvalFrame> predictions,
                 std::span<const EvalFrame> ground_truth);

}  // namespace wsloc
