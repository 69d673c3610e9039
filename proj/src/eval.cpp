// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "wsloc/error.hpp"
#include "wsloc/parallel.hpp"

namespace wsloc {

namespace {

bool passes(double value, double thresh, IouComparison comparison) {
  return comparison == IouComparison::kAtLeast ? value >= thresh
                                               : value > thresh;
}

std::map<FrameKey, std::size_t> index_by_key(std::span<const EvalFrame> frames) {
  std::map<FrameKey, std::size_t> index;
  for (std::size_t i = 0; i < frames.size(); ++i) index.emplace(frames[i].key, i);
  return index;
}

// One class's detections in ranking order, each with its IOUs against the
// same-class ground truths of its frame.
struct RankedDetection {
  std::size_t frame_slot;  // index into the class's ground-truth groups
  std::vector<double> ious;
};

struct ClassProblem {
  std::vector<RankedDetection> detections;
  std::vector<std::size_t> group_sizes;
  std::size_t num_ground_truth = 0;
};

ClassProblem build_problem(std::span<const EvalFrame> predictions,
                           std::span<const EvalFrame> ground_truth,
                           int class_id) {
  ClassProblem problem;
  std::map<FrameKey, std::size_t> slot_of;
  std::vector<std::vector<const Box2D*>> groups;
  for (const EvalFrame& f : ground_truth) {
    std::vector<const Box2D*> boxes;
    for (const Box2D& b : f.boxes) {
      if (b.label() == class_id) boxes.push_back(&b);
    }
    problem.num_ground_truth += boxes.size();
    if (slot_of.emplace(f.key, groups.size()).second) {
      groups.push_back(std::move(boxes));
    } else {
      auto& g = groups[slot_of[f.key]];
      g.insert(g.end(), boxes.begin(), boxes.end());
    }
  }

  struct Candidate {
    double confidence;
    std::size_t order;
    std::size_t slot;
    const Box2D* box;
  };
  std::vector<Candidate> candidates;
  const std::size_t no_slot = groups.size();
  for (const EvalFrame& f : predictions) {
    auto it = slot_of.find(f.key);
    const std::size_t slot = it == slot_of.end() ? no_slot : it->second;
    for (const Box2D& b : f.boxes) {
      if (b.label() != class_id) continue;
      candidates.push_back({b.confidence(), candidates.size(), slot, &b});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.confidence > b.confidence;
                   });
  for (const Candidate& c : candidates) {
    RankedDetection d{c.slot, {}};
    if (c.slot != no_slot) {
      for (const Box2D* g : groups[c.slot]) d.ious.push_back(iou(*c.box, *g));
    }
    problem.detections.push_back(std::move(d));
  }
  problem.group_sizes.reserve(groups.size() + 1);
  for (const auto& g : groups) problem.group_sizes.push_back(g.size());
  problem.group_sizes.push_back(0);
  return problem;
}

double interpolated_ap(const std::vector<bool>& is_tp, std::size_t num_gt) {
  const std::size_t n = is_tp.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += is_tp[i] ? 1 : 0;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  std::size_t cursor = 0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    while (cursor < n && recall[cursor] < level) ++cursor;
    if (cursor == n) break;
    sum += precision[cursor];
  }
  return sum / 101.0;
}

double solve_ap(const ClassProblem& problem, double iou_thresh) {
  std::vector<std::vector<bool>> taken(problem.group_sizes.size());
  for (std::size_t g = 0; g < taken.size(); ++g) {
    taken[g].assign(problem.group_sizes[g], false);
  }
  std::vector<bool> is_tp;
  is_tp.reserve(problem.detections.size());
  for (const RankedDetection& d : problem.detections) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t k = 0; k < d.ious.size(); ++k) {
      if (taken[d.frame_slot][k]) continue;
      if (d.ious[k] >= iou_thresh && d.ious[k] > best_iou) {
        best_iou = d.ious[k];
        best = k;
      }
    }
    if (best) taken[d.frame_slot][*best] = true;
    is_tp.push_back(best.has_value());
  }
  return interpolated_ap(is_tp, problem.num_ground_truth);
}

}  // namespace

std::vector<EvalFrame> eval_frames_from_tools(
    std::span<const FrameDetections> frames) {
  std::vector<EvalFrame> out;
  out.reserve(frames.size());
  for (const FrameDetections& f : frames) out.push_back({f.key(), f.tools});
  return out;
}

std::vector<EvalFrame> eval_frames_from_records(
    std::span<const PseudoLabelRecord> records) {
  std::vector<EvalFrame> out;
  out.reserve(records.size());
  for (const PseudoLabelRecord& r : records) out.push_back({r.key(), r.entries});
  return out;
}

MatchResult greedy_match(std::span<const Box2D> predictions,
                         std::span<const Box2D> ground_truths,
                         double iou_thresh, IouComparison comparison) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence() > predictions[b].confidence();
  });
  MatchResult result;
  std::vector<bool> taken(ground_truths.size(), false);
  for (std::size_t p : order) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < ground_truths.size(); ++g) {
      if (taken[g] || ground_truths[g].label() != predictions[p].label()) continue;
      const double v = iou(predictions[p], ground_truths[g]);
      if (passes(v, iou_thresh, comparison) && v > best_iou) {
        best_iou = v;
        best = g;
      }
    }
    if (best) {
      taken[*best] = true;
      result.matches.push_back({p, *best, best_iou});
    } else {
      result.unmatched_predictions.push_back(p);
    }
  }
  for (std::size_t g = 0; g < ground_truths.size(); ++g) {
    if (!taken[g]) result.unmatched_ground_truths.push_back(g);
  }
  std::sort(result.unmatched_predictions.begin(),
            result.unmatched_predictions.end());
  return result;
}

LabelQuality label_quality(std::span<const PseudoLabelRecord> records,
                           std::span<const EvalFrame> ground_truth,
                           std::size_t num_classes, double iou_thresh) {
  LabelQuality q;
  q.per_class.resize(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    q.per_class[c].class_id = static_cast<int>(c);
  }
  auto count_class = [&](int id) -> ClassQuality* {
    if (id < 0 || static_cast<std::size_t>(id) >= num_classes) return nullptr;
    return &q.per_class[static_cast<std::size_t>(id)];
  };
  for (const EvalFrame& f : ground_truth) {
    for (const Box2D& b : f.boxes) {
      ++q.ground_truth;
      if (auto* c = count_class(b.label())) ++c->ground_truth;
    }
  }
  const auto index = index_by_key(ground_truth);
  for (const PseudoLabelRecord& r : records) {
    q.emitted += static_cast<std::int64_t>(r.entries.size());
    for (const Box2D& b : r.entries) {
      if (auto* c = count_class(b.label())) ++c->emitted;
    }
    auto it = index.find(r.key());
    if (it == index.end()) {
      ++q.uncovered_frames;
      continue;
    }
    const MatchResult m = greedy_match(r.entries, ground_truth[it->second].boxes,
                                       iou_thresh, IouComparison::kGreaterThan);
    q.correct += static_cast<std::int64_t>(m.matches.size());
    for (const Match& match : m.matches) {
      if (auto* c = count_class(r.entries[match.prediction].label())) ++c->correct;
    }
  }
  if (q.emitted > 0) {
    q.precision = static_cast<double>(q.correct) / static_cast<double>(q.emitted);
  }
  if (q.ground_truth > 0) {
    q.recall = static_cast<double>(q.correct) / static_cast<double>(q.ground_truth);
  }
  return q;
}

std::array<double, 10> coco_iou_thresholds() {
  std::array<double, 10> t{};
  for (int i = 0; i < 10; ++i) t[static_cast<std::size_t>(i)] = (50 + 5 * i) / 100.0;
  return t;
}

std::optional<double> average_precision(std::span<const EvalFrame> predictions,
                                        std::span<const EvalFrame> ground_truth,
                                        int class_id, double iou_thresh) {
  const ClassProblem problem = build_problem(predictions, ground_truth, class_id);
  if (problem.num_ground_truth == 0) return std::nullopt;
  return solve_ap(problem, iou_thresh);
}

MapReport evaluate_map(std::span<const EvalFrame> predictions,
                       std::span<const EvalFrame> ground_truth,
                       std::span<const double> thresholds, int jobs) {
  if (thresholds.empty()) throw EvalError("no IOU thresholds given");
  std::set<int> classes;
  for (const EvalFrame& f : ground_truth) {
    for (const Box2D& b : f.boxes) classes.insert(b.label());
  }
  if (classes.empty()) throw EvalError("ground truth is empty: nothing to evaluate");

  const std::vector<int> class_list(classes.begin(), classes.end());
  std::vector<std::vector<double>> ap(class_list.size());
  parallel_for(class_list.size(), jobs, [&](std::size_t c) {
    const ClassProblem problem =
        build_problem(predictions, ground_truth, class_list[c]);
    for (double t : thresholds) ap[c].push_back(solve_ap(problem, t));
  });

  MapReport report;
  const double nc = static_cast<double>(class_list.size());
  const double nt = static_cast<double>(thresholds.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    double sum = 0.0;
    for (std::size_t c = 0; c < class_list.size(); ++c) sum += ap[c][t];
    report.per_threshold.emplace_back(thresholds[t], sum / nc);
  }
  double total = 0.0;
  for (std::size_t c = 0; c < class_list.size(); ++c) {
    double sum = 0.0;
    for (double v : ap[c]) sum += v;
    report.per_class[class_list[c]] = sum / nt;
    total += sum / nt;
  }
  report.map = total / nc;
  return report;
}

double map_range(std::span<const EvalFrame> predictions,
                 std::span<const EvalFrame> ground_truth) {
  const auto t = coco_iou_thresholds();
  return evaluate_map(predictions, ground_truth, t).map;
}

}  // namespace wsloc
