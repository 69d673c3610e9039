// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "util.hpp"
#include "wsloc/error.hpp"
#include "wsloc/random.hpp"
#include "wsloc/sim.hpp"

namespace wsloc {

namespace {

constexpr std::uint64_t kTagSurrogate = 0x73757272;  // "surr"
constexpr double kTrainMatchIou = 0.5;

}  // namespace

SurrogateDetector::SurrogateDetector(ClassRegistry registry,
                                     ConfusionMatrix confusion,
                                     SurrogateOptions options)
    : registry_(std::move(registry)),
      confusion_(std::move(confusion)),
      options_(options) {
  if (!(options_.jitter_sigma >= 0.0) || !std::isfinite(options_.jitter_sigma)) {
    throw ConfigError("surrogate jitter sigma must be finite and >= 0");
  }
  if (options_.image_size.width <= 0 || options_.image_size.height <= 0) {
    throw ConfigError("surrogate image size must be positive");
  }
  DetectorNoise check;
  check.label_confusion = confusion_;
  if (confusion_.empty()) throw ConfigError("surrogate confusion is empty");
  check.validate(registry_.size());
}

int SurrogateDetector::sample_label(int true_class, double u) const {
  return sim_internal::draw_from_row(
      confusion_.at(static_cast<std::size_t>(true_class)), true_class, u);
}

std::vector<Box2D> SurrogateDetector::infer(const GroundTruthFrame& gt) const {
  std::vector<Box2D> out;
  out.reserve(gt.instruments.size());
  const std::uint64_t clip = hash_string(gt.clip_id);
  for (std::size_t j = 0; j < gt.instruments.size(); ++j) {
    const InstrumentTruth& inst = gt.instruments[j];
    auto rng = make_stream(options_.seed,
                           {kTagSurrogate, clip,
                            static_cast<std::uint64_t>(gt.frame_index), j});
    const int label = sample_label(inst.class_id, uniform01(rng));
    const PartKind kind =
        registry_.at(label).is_special ? PartKind::kTip : PartKind::kClevis;
    const SizeWH size =
        nominal_part_size(label, kind, registry_.size(), options_.image_size);
    const Box2D& part = inst.part(kind);
    const double cx = part.center_x();
    const double cy = part.center_y();
    auto box = sim_internal::jitter_box(
        cx - 0.5 * size.width, cy - 0.5 * size.height, cx + 0.5 * size.width,
        cy + 0.5 * size.height, options_.jitter_sigma, label,
        options_.image_size, rng);
    if (box) out.push_back(*box);
  }
  return out;
}

SurrogateDetector surrogate_train(std::span<const PseudoLabelRecord> records,
                                  const GroundTruthIndex& gt_index,
                                  const ClassRegistry& registry,
                                  const SurrogateOptions& options) {
  if (records.empty()) {
    throw ValidationError("surrogate training set is empty");
  }
  const std::size_t n = registry.size();
  std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
  std::vector<double> marginal(n, 0.0);
  double matched = 0.0;
  for (const PseudoLabelRecord& r : records) {
    const GroundTruthFrame* gt = gt_index.find(r.key());
    if (gt == nullptr) continue;
    for (const Box2D& b : r.entries) {
      if (!registry.contains(b.label())) continue;
      const InstrumentTruth* best = nullptr;
      double best_iou = kTrainMatchIou;
      for (const InstrumentTruth& inst : gt->instruments) {
        const double v = std::max(iou(b, inst.clevis), iou(b, inst.tip));
        if (v > best_iou) {
          best_iou = v;
          best = &inst;
        }
      }
      if (best == nullptr) continue;
      counts[static_cast<std::size_t>(best->class_id)]
            [static_cast<std::size_t>(b.label())] += 1.0;
      marginal[static_cast<std::size_t>(b.label())] += 1.0;
      matched += 1.0;
    }
  }
  if (matched == 0.0) {
    throw ValidationError(
        "surrogate training set has no box matching ground truth");
  }
  ConfusionMatrix confusion(n, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    double total = 0.0;
    for (double v : counts[c]) total += v;
    const auto& source = total > 0.0 ? counts[c] : marginal;
    const double denom = total > 0.0 ? total : matched;
    for (std::size_t k = 0; k < n; ++k) confusion[c][k] = source[k] / denom;
  }
  return SurrogateDetector(registry, std::move(confusion), options);
}

std::vector<Box2D> surrogate_infer(const SurrogateDetector& detector,
                                   const GroundTruthFrame& gt) {
  return detector.infer(gt);
}

}  // namespace wsloc
