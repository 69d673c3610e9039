// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic scenes, noisy detector emulators and a confusion-model tools
// detector, used to close the training loop without real video.
//
// Scene geometry. Instruments stand vertically with the distal end up: the
// tip box on top, the clevis box starting 70% of the way down the tip, and
// the shaft running from there to the bottom image edge. Each class has its
// own nominal clevis and tip size. The image is split into one vertical lane
// per instrument; an uncrossed frame puts caption position i in lane i.
// Crossed frames permute the lanes (a swap of two instruments, or with three
// instruments a rotation of all of them with probability crossing_prob^2).
//
// Clips. A clip has frames_per_clip frames that share one instrument set
// (and hence one caption). Everything else is drawn per frame.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wsloc/eval.hpp"
#include "wsloc/geometry.hpp"
#include "wsloc/model.hpp"

namespace wsloc {

struct SceneSpec {
  ImageSize image_size{1280, 720};
  // Relative weights of 1, 2 and 3 instruments per clip.
  std::array<double, 3> tools_per_frame{0.0, 0.0, 1.0};
  double crossing_prob = 0.2;
  // Probability that an instrument is drawn from the special classes.
  double special_fraction = 0.4;
  int frames_per_clip = 25;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
};

struct SizeWH {
  double width = 0.0;
  double height = 0.0;
};

// Nominal clevis or tip size of a class (kShaft is rejected). Sizes lie on a
// log-spaced grid, distinct per class within each kind, scaled down for
// images smaller than 1280x720.
SizeWH nominal_part_size(int class_id, PartKind kind, std::size_t num_classes,
                         ImageSize image);

struct InstrumentTruth {
  int class_id = 0;
  int caption_position = 0;
  PartKind anchor_kind = PartKind::kClevis;  // tip for special classes
  Box2D tool_box;                             // label = class_id
  Box2D shaft;
  Box2D clevis;
  Box2D tip;

  const Box2D& part(PartKind kind) const;
};

struct GroundTruthFrame {
  std::string clip_id;
  std::int64_t frame_index = 0;
  bool crossed = false;
  std::vector<InstrumentTruth> instruments;  // left to right

  FrameKey key() const { return {clip_id, frame_index}; }
};

// Fourteen surgical instrument names, five of them special.
ClassRegistry default_sim_registry();

struct SimCorpus {
  ClassRegistry registry;
  SceneSpec spec;
  std::vector<GroundTruthFrame> frames;  // canonical order
  CaptionMap captions;
};

// Throws ConfigError for an invalid SceneSpec or n_frames < 1.
SimCorpus generate_corpus(const SceneSpec& spec, std::int64_t n_frames,
                          const ClassRegistry& registry = default_sim_registry(),
                          int jobs = 1);

std::vector<EvalFrame> ground_truth_eval_frames(
    std::span<const GroundTruthFrame> frames);

struct DetectorNoise {
  double box_jitter_sigma = 0.0;  // pixels, per coordinate
  double miss_rate = 0.0;
  double false_positive_rate = 0.0;  // expected count per frame
  // Row-stochastic, true class -> emitted class. Empty means identity.
  std::vector<std::vector<double>> label_confusion;

  // Throws ConfigError.
  void validate(std::size_t num_classes) const;

  // sigma 3 px, 3% misses, 0.3 false positives per frame.
  static DetectorNoise parts_default();
};

// Jitter is a normal truncated at 2.5 sigma; a box's confidence is
// 1 / (1 + (m / 4 sigma)^2) where m is the root-sum-square of its coordinate
// offsets. False positives get confidences in [0.05, 0.25).
std::vector<PartDetection> emulate_parts_detector(const GroundTruthFrame& gt,
                                                  const DetectorNoise& noise,
                                                  const ClassRegistry& registry,
                                                  ImageSize image,
                                                  std::uint64_t seed);

// One box per detected instrument with a label drawn from
// noise.label_confusion, sized for that label and centred on the
// instrument's part of the label's anchor kind.
std::vector<Box2D> emulate_tools_detector(const GroundTruthFrame& gt,
                                          const DetectorNoise& noise,
                                          const ClassRegistry& registry,
                                          ImageSize image, std::uint64_t seed);

// Parts-only detections for the whole corpus, in corpus order.
std::vector<FrameDetections> emulate_corpus(const SimCorpus& corpus,
                                            const DetectorNoise& noise,
                                            int jobs = 1);

class GroundTruthIndex {
 public:
  explicit GroundTruthIndex(std::span<const GroundTruthFrame> frames);

  const GroundTruthFrame* find(const FrameKey& key) const;
  std::size_t size() const { return index_.size(); }

 private:
  std::span<const GroundTruthFrame> frames_;
  std::map<FrameKey, std::size_t> index_;
};

struct SurrogateOptions {
  std::uint64_t seed = 0;
  double jitter_sigma = 2.0;
  ImageSize image_size{1280, 720};
};

using ConfusionMatrix = std::vector<std::vector<double>>;

class SurrogateDetector {
 public:
  // Throws ConfigError unless confusion is a registry-sized row-stochastic
  // matrix.
  SurrogateDetector(ClassRegistry registry, ConfusionMatrix confusion,
                    SurrogateOptions options);

  const ClassRegistry& registry() const { return registry_; }
  const ConfusionMatrix& confusion() const { return confusion_; }
  const SurrogateOptions& options() const { return options_; }

  // Inverse-CDF draw from row true_class, visiting the true class first and
  // then the others by id. u is uniform in [0, 1).
  int sample_label(int true_class, double u) const;

  // One box per instrument. The uniforms behind each draw are keyed by
  // (seed, frame, instrument), so detectors trained on different data share
  // them.
  std::vector<Box2D> infer(const GroundTruthFrame& gt) const;

 private:
  ClassRegistry registry_;
  ConfusionMatrix confusion_;
  SurrogateOptions options_;
};

// Fits the per-class label distribution of pseudo-labels matched to ground
// truth instruments (best IOU > 0.5 against the instrument's clevis or tip).
// Rows without data fall back to the overall label distribution. Throws
// ValidationError when no record exists or no box matches.
SurrogateDetector surrogate_train(std::span<const PseudoLabelRecord> records,
                                  const GroundTruthIndex& gt_index,
                                  const ClassRegistry& registry,
                                  const SurrogateOptions& options);

std::vector<Box2D> surrogate_infer(const SurrogateDetector& detector,
                                   const GroundTruthFrame& gt);

// Ground-truth JSONL. Each line is a detections line (true parts at
// confidence 1, true tool boxes) extended with "crossed" and, per tool,
// "caption_position" and its "parts" by kind.
std::string format_ground_truth_line(const GroundTruthFrame& frame,
                                     const ClassRegistry& registry);
void write_ground_truth(const std::filesystem::path& path,
                        std::span<const GroundTruthFrame> frames,
                        const ClassRegistry& registry);
// Throws FormatError.
std::vector<GroundTruthFrame> read_ground_truth(
    const std::filesystem::path& path, const ClassRegistry& registry);

}  // namespace wsloc
