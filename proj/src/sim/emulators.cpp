// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <optional>

#include "util.hpp"
#include "wsloc/error.hpp"
#include "wsloc/parallel.hpp"
#include "wsloc/random.hpp"
#include "wsloc/sim.hpp"

namespace wsloc {

namespace {

using sim_internal::draw_from_row;
using sim_internal::jitter_box;

constexpr std::uint64_t kTagParts = 0x70617274;  // "part"
constexpr std::uint64_t kTagTools = 0x746f6f6c;  // "tool"

constexpr double kFalsePositiveMinSide = 30.0;
constexpr double kFalsePositiveMaxSide = 130.0;

Box2D random_box(ImageSize image, std::mt19937_64& rng, double conf, int label) {
  const double w = image.width;
  const double h = image.height;
  const double bw = std::min(w, uniform(rng, kFalsePositiveMinSide, kFalsePositiveMaxSide));
  const double bh = std::min(h, uniform(rng, kFalsePositiveMinSide, kFalsePositiveMaxSide));
  const double x = uniform(rng, 0.0, w - bw);
  const double y = uniform(rng, 0.0, h - bh);
  return Box2D(x, y, x + bw, y + bh, conf, label);
}

}  // namespace

void DetectorNoise::validate(std::size_t num_classes) const {
  if (!(box_jitter_sigma >= 0.0) || !std::isfinite(box_jitter_sigma)) {
    throw ConfigError("box_jitter_sigma must be finite and >= 0");
  }
  if (!(miss_rate >= 0.0 && miss_rate <= 1.0)) {
    throw ConfigError("miss_rate must lie in [0, 1]");
  }
  if (!(false_positive_rate >= 0.0) || !std::isfinite(false_positive_rate)) {
    throw ConfigError("false_positive_rate must be finite and >= 0");
  }
  if (label_confusion.empty()) return;
  if (label_confusion.size() != num_classes) {
    throw ConfigError("label_confusion must have one row per class");
  }
  for (std::size_t r = 0; r < num_classes; ++r) {
    const auto& row = label_confusion[r];
    if (row.size() != num_classes) {
      throw ConfigError("label_confusion row " + std::to_string(r) +
                        " has the wrong length");
    }
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError("label_confusion entries must be finite and >= 0");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("label_confusion row " + std::to_string(r) +
                        " does not sum to 1");
    }
  }
}

DetectorNoise DetectorNoise::parts_default() {
  DetectorNoise n;
  n.box_jitter_sigma = 3.0;
  n.miss_rate = 0.03;
  n.false_positive_rate = 0.3;
  return n;
}

std::vector<PartDetection> emulate_parts_detector(const GroundTruthFrame& gt,
                                                  const DetectorNoise& noise,
                                                  const ClassRegistry& registry,
                                                  ImageSize image,
                                                  std::uint64_t seed) {
  noise.validate(registry.size());
  auto rng = make_stream(seed, {kTagParts, hash_string(gt.clip_id),
                                static_cast<std::uint64_t>(gt.frame_index)});
  std::vector<PartDetection> out;
  for (const InstrumentTruth& inst : gt.instruments) {
    for (PartKind kind : kAllPartKinds) {
      if (uniform01(rng) < noise.miss_rate) continue;
      const Box2D& t = inst.part(kind);
      auto box = jitter_box(t.x_min(), t.y_min(), t.x_max(), t.y_max(),
                            noise.box_jitter_sigma, kUnlabeled, image, rng);
      if (box) out.push_back({*box, kind});
    }
  }
  const std::int64_t fps = poisson(rng, noise.false_positive_rate);
  for (std::int64_t i = 0; i < fps; ++i) {
    const PartKind kind = kAllPartKinds[uniform_index(rng, kAllPartKinds.size())];
    const double conf = uniform(rng, 0.05, 0.25);
    out.push_back({random_box(image, rng, conf, kUnlabeled), kind});
  }
  return out;
}

std::vector<Box2D> emulate_tools_detector(const GroundTruthFrame& gt,
                                          const DetectorNoise& noise,
                                          const ClassRegistry& registry,
                                          ImageSize image, std::uint64_t seed) {
  noise.validate(registry.size());
  auto rng = make_stream(seed, {kTagTools, hash_string(gt.clip_id),
                                static_cast<std::uint64_t>(gt.frame_index)});
  std::vector<Box2D> out;
  for (const InstrumentTruth& inst : gt.instruments) {
    if (uniform01(rng) < noise.miss_rate) continue;
    const double u = uniform01(rng);
    const int label =
        noise.label_confusion.empty()
            ? inst.class_id
            : draw_from_row(noise.label_confusion[static_cast<std::size_t>(inst.class_id)],
                         inst.class_id, u);
    const PartKind kind =
        registry.at(label).is_special ? PartKind::kTip : PartKind::kClevis;
    const SizeWH size = nominal_part_size(label, kind, registry.size(), image);
    const Box2D& part = inst.part(kind);
    const double cx = part.center_x();
    const double cy = part.center_y();
    auto box = jitter_box(cx - 0.5 * size.width, cy - 0.5 * size.height,
                          cx + 0.5 * size.width, cy + 0.5 * size.height,
                          noise.box_jitter_sigma, label, image, rng);
    if (box) out.push_back(*box);
  }
  const std::int64_t fps = poisson(rng, noise.false_positive_rate);
  for (std::int64_t i = 0; i < fps; ++i) {
    const int label = static_cast<int>(uniform_index(rng, registry.size()));
    const double conf = uniform(rng, 0.05, 0.6);
    out.push_back(random_box(image, rng, conf, label));
  }
  return out;
}

std::vector<FrameDetections> emulate_corpus(const SimCorpus& corpus,
                                            const DetectorNoise& noise,
                                            int jobs) {
  noise.validate(corpus.registry.size());
  std::vector<FrameDetections> out(corpus.frames.size());
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    const GroundTruthFrame& gt = corpus.frames[i];
    out[i].clip_id = gt.clip_id;
    out[i].frame_index = gt.frame_index;
    out[i].parts = emulate_parts_detector(gt, noise, corpus.registry,
                                          corpus.spec.image_size, corpus.spec.seed);
  });
  return out;
}

}  // namespace wsloc
