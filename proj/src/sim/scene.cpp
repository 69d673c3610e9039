// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>

#include "wsloc/error.hpp"
#include "wsloc/parallel.hpp"
#include "wsloc/random.hpp"
#include "wsloc/sim.hpp"

namespace wsloc {

namespace {

constexpr std::uint64_t kTagClip = 0x636c6970;    // "clip"
constexpr std::uint64_t kTagFrame = 0x6672616d;   // "fram"

constexpr double kSizeStep = 1.08;
constexpr double kClevisBase = 96.0;
constexpr double kTipBase = 88.0;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::size_t grid_side(std::size_t num_classes) {
  std::size_t g = 2;
  while (g * g < num_classes) ++g;
  return g;
}

std::string clip_name(std::int64_t clip) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clip%05lld", static_cast<long long>(clip));
  return buf;
}

struct ClipPlan {
  std::vector<int> classes;  // caption order
};

ClipPlan plan_clip(const SceneSpec& spec, const ClassRegistry& registry,
                   std::int64_t clip) {
  auto rng = make_stream(spec.seed, {kTagClip, static_cast<std::uint64_t>(clip)});
  const double total =
      spec.tools_per_frame[0] + spec.tools_per_frame[1] + spec.tools_per_frame[2];
  double u = uniform01(rng) * total;
  std::size_t n = 3;
  for (std::size_t k = 0; k < 3; ++k) {
    if (spec.tools_per_frame[k] > 0.0 && u < spec.tools_per_frame[k]) {
      n = k + 1;
      break;
    }
    u -= spec.tools_per_frame[k];
  }
  n = std::min(n, registry.size());

  std::vector<int> special, regular;
  for (const ToolClass& c : registry.classes()) {
    (c.is_special ? special : regular).push_back(c.id);
  }
  ClipPlan plan;
  for (std::size_t i = 0; i < n; ++i) {
    bool want_special = uniform01(rng) < spec.special_fraction;
    if (special.empty()) want_special = false;
    if (regular.empty()) want_special = true;
    auto& pool = want_special ? special : regular;
    const std::size_t pick = uniform_index(rng, pool.size());
    plan.classes.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return plan;
}

// lane[s] = caption position of the instrument drawn in lane s.
std::vector<int> draw_lanes(std::size_t n, double p, std::mt19937_64& rng) {
  std::vector<int> lanes(n);
  std::iota(lanes.begin(), lanes.end(), 0);
  const double u = uniform01(rng);
  if (n == 3 && u < p * p) {
    if (uniform01(rng) < 0.5) {
      lanes = {1, 2, 0};
    } else {
      lanes = {2, 0, 1};
    }
  } else if (n >= 2 && u < p) {
    const std::size_t a = uniform_index(rng, n);
    std::size_t b = uniform_index(rng, n - 1);
    if (b >= a) ++b;
    std::swap(lanes[a], lanes[b]);
  }
  return lanes;
}

GroundTruthFrame make_frame(const SceneSpec& spec, const ClassRegistry& registry,
                            const std::string& clip_id, std::int64_t frame_index,
                            const ClipPlan& plan) {
  auto rng = make_stream(spec.seed, {kTagFrame, hash_string(clip_id),
                                     static_cast<std::uint64_t>(frame_index)});
  const double w = spec.image_size.width;
  const double h = spec.image_size.height;
  const std::size_t n = plan.classes.size();
  const std::vector<int> lanes = draw_lanes(n, spec.crossing_prob, rng);

  GroundTruthFrame frame;
  frame.clip_id = clip_id;
  frame.frame_index = frame_index;
  const double lane_width = w / static_cast<double>(n);
  for (std::size_t s = 0; s < n; ++s) {
    const int position = lanes[s];
    if (position != static_cast<int>(s)) frame.crossed = true;
    const int id = plan.classes[static_cast<std::size_t>(position)];
    const ToolClass& cls = registry.at(id);
    const SizeWH cs = nominal_part_size(id, PartKind::kClevis, registry.size(),
                                        spec.image_size);
    const SizeWH ts =
        nominal_part_size(id, PartKind::kTip, registry.size(), spec.image_size);

    const double cx =
        (static_cast<double>(s) + 0.5 + uniform(rng, -0.25, 0.25)) * lane_width;
    const double tip_top = uniform(rng, 0.15, 0.45) * h;
    const double clevis_top = tip_top + 0.7 * ts.height;
    const double shaft_top = tip_top + 0.8 * ts.height;
    const double shaft_half = 0.3 * cs.width;

    Box2D tip(cx - 0.5 * ts.width, tip_top, cx + 0.5 * ts.width,
              tip_top + ts.height);
    Box2D clevis(cx - 0.5 * cs.width, clevis_top, cx + 0.5 * cs.width,
                 clevis_top + cs.height);
    Box2D shaft(cx - shaft_half, shaft_top, cx + shaft_half, h);
    const PartKind anchor = cls.is_special ? PartKind::kTip : PartKind::kClevis;
    const Box2D& anchor_box = anchor == PartKind::kTip ? tip : clevis;
    frame.instruments.push_back(InstrumentTruth{
        id, position, anchor, anchor_box.with_label(id), shaft, clevis, tip});
  }
  return frame;
}

}  // namespace

void SceneSpec::validate() const {
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw ConfigError("image size must be positive");
  }
  double total = 0.0;
  for (double w : tools_per_frame) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("tools_per_frame weights must be finite and >= 0");
    }
    total += w;
  }
  if (total <= 0.0) throw ConfigError("tools_per_frame weights sum to zero");
  if (!is_probability(crossing_prob)) {
    throw ConfigError("crossing_prob must lie in [0, 1]");
  }
  if (!is_probability(special_fraction)) {
    throw ConfigError("special_fraction must lie in [0, 1]");
  }
  if (frames_per_clip < 1) throw ConfigError("frames_per_clip must be >= 1");
}

SizeWH nominal_part_size(int class_id, PartKind kind, std::size_t num_classes,
                         ImageSize image) {
  if (kind == PartKind::kShaft) {
    throw ValidationError("shaft boxes have no nominal size");
  }
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= num_classes) {
    throw RegistryError("class id " + std::to_string(class_id) +
                        " out of range");
  }
  const std::size_t g = grid_side(num_classes);
  const std::size_t cells = g * g;
  std::size_t a = kind == PartKind::kClevis ? 7 : 5;
  while (std::gcd(a, cells) != 1) ++a;
  const std::size_t b = kind == PartKind::kClevis ? 3 : 11;
  const std::size_t cell = (static_cast<std::size_t>(class_id) * a + b) % cells;
  const double base = kind == PartKind::kClevis ? kClevisBase : kTipBase;
  const double scale = std::min({1.0, image.width / 1280.0, image.height / 720.0});
  return {base * scale * std::pow(kSizeStep, static_cast<double>(cell % g)),
          base * scale * std::pow(kSizeStep, static_cast<double>(cell / g))};
}

const Box2D& InstrumentTruth::part(PartKind kind) const {
  switch (kind) {
    case PartKind::kShaft:
      return shaft;
    case PartKind::kClevis:
      return clevis;
    case PartKind::kTip:
      return tip;
  }
  return clevis;
}

ClassRegistry default_sim_registry() {
  return ClassRegistry::build({
      "bipolar forceps",
      "monopolar curved scissors",
      "prograsp forceps",
      "large needle driver",
      "tip-up fenestrated grasper",
      "vessel sealer",
      "permanent cautery hook/spatula",
      "clip applier",
      "suction irrigator",
      "force bipolar",
      "cadiere forceps",
      "stapler",
      "bipolar dissector",
      "grasping retractor",
  });
}

SimCorpus generate_corpus(const SceneSpec& spec, std::int64_t n_frames,
                          const ClassRegistry& registry, int jobs) {
  spec.validate();
  if (n_frames < 1) throw ConfigError("n_frames must be >= 1");
  if (registry.empty()) throw ConfigError("class registry is empty");

  SimCorpus corpus;
  corpus.registry = registry;
  corpus.spec = spec;
  const std::int64_t per_clip = spec.frames_per_clip;
  const std::int64_t n_clips = (n_frames + per_clip - 1) / per_clip;
  std::vector<ClipPlan> plans;
  plans.reserve(static_cast<std::size_t>(n_clips));
  for (std::int64_t c = 0; c < n_clips; ++c) {
    plans.push_back(plan_clip(spec, registry, c));
    const std::string name = clip_name(c);
    corpus.captions.emplace(name, ClipCaption{name, plans.back().classes});
  }

  std::vector<std::optional<GroundTruthFrame>> frames(
      static_cast<std::size_t>(n_frames));
  parallel_for(frames.size(), jobs, [&](std::size_t i) {
    const auto k = static_cast<std::int64_t>(i);
    const std::int64_t clip = k / per_clip;
    frames[i] = make_frame(spec, registry, clip_name(clip), k % per_clip,
                           plans[static_cast<std::size_t>(clip)]);
  });
  corpus.frames.reserve(frames.size());
  for (auto& f : frames) corpus.frames.push_back(std::move(*f));
  return corpus;
}

std::vector<EvalFrame> ground_truth_eval_frames(
    std::span<const GroundTruthFrame> frames) {
  std::vector<EvalFrame> out;
  out.reserve(frames.size());
  for (const GroundTruthFrame& f : frames) {
    EvalFrame e{f.key(), {}};
    for (const InstrumentTruth& inst : f.instruments) e.boxes.push_back(inst.tool_box);
    out.push_back(std::move(e));
  }
  return out;
}

GroundTruthIndex::GroundTruthIndex(std::span<const GroundTruthFrame> frames)
    : frames_(frames) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    index_.emplace(frames[i].key(), i);
  }
}

const GroundTruthFrame* GroundTruthIndex::find(const FrameKey& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &frames_[it->second];
}

}  // namespace wsloc
