// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multi-round orchestration: bootstrap, then per round train a tools detector
// on the previous dataset, run it over every frame and filter the result.
//
// Workdir layout:
//   round_<k>/labels/*.txt, round_<k>/classes.txt, round_<k>/manifest.json
//   round_<k>/detections.jsonl   (file-backed detector only, supplied
//                                 externally; every line must carry the
//                                 "train_digest" of round_<k-1>)
//
// A round whose manifest exists is reused when its dataset still hashes to
// the recorded output digest (otherwise IntegrityError) and the manifest was
// produced from the same inputs and parameters (otherwise StalenessError).

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsloc/config.hpp"
#include "wsloc/io.hpp"
#include "wsloc/manifest.hpp"
#include "wsloc/model.hpp"
#include "wsloc/sim.hpp"

namespace wsloc {

// The frame inventory a plan runs over. Only the part detections of `frames`
// are used; any tools they carry are ignored.
struct Corpus {
  ClassRegistry registry;
  ImageSize image_size{1280, 720};
  std::vector<FrameDetections> frames;
  CaptionMap captions;
};

// Hash of the registry, image size, captions and part detections.
std::string corpus_digest(const Corpus& corpus);

class ToolDetector {
 public:
  virtual ~ToolDetector() = default;
  virtual std::vector<Box2D> detect(const FrameDetections& frame) const = 0;
};

class DetectorSource {
 public:
  virtual ~DetectorSource() = default;

  virtual std::string name() const = 0;

  // `round` is the round the detections will feed; `dataset` was read back
  // from round_<round-1> and hashes to `dataset_digest`.
  virtual std::unique_ptr<ToolDetector> train(
      int round, const PseudoDataset& dataset, const std::string& dataset_digest,
      const std::filesystem::path& workdir) const = 0;

  // mAP@[.5:.05:.95] of a detector trained on `dataset`, when it can be
  // computed in-process.
  virtual std::optional<double> model_map(const PseudoDataset& dataset,
                                          int jobs) const = 0;
};

// Reads round_<k>/detections.jsonl. Frames missing from the file get no
// tools. Throws StalenessError when a line's train_digest is absent or
// differs from the training dataset's digest.
class FileDetectorSource : public DetectorSource {
 public:
  explicit FileDetectorSource(ClassRegistry registry);

  std::string name() const override { return "file"; }
  std::unique_ptr<ToolDetector> train(
      int round, const PseudoDataset& dataset, const std::string& dataset_digest,
      const std::filesystem::path& workdir) const override;
  std::optional<double> model_map(const PseudoDataset&, int) const override {
    return std::nullopt;
  }

 private:
  ClassRegistry registry_;
};

class SurrogateDetectorSource : public DetectorSource {
 public:
  // `ground_truth` must outlive the source.
  SurrogateDetectorSource(ClassRegistry registry,
                          const std::vector<GroundTruthFrame>& ground_truth,
                          SurrogateOptions options);

  std::string name() const override { return "surrogate"; }
  std::unique_ptr<ToolDetector> train(
      int round, const PseudoDataset& dataset, const std::string& dataset_digest,
      const std::filesystem::path& workdir) const override;
  std::optional<double> model_map(const PseudoDataset& dataset,
                                  int jobs) const override;

  SurrogateDetector fit(const PseudoDataset& dataset) const;

 private:
  ClassRegistry registry_;
  const std::vector<GroundTruthFrame>* ground_truth_;
  GroundTruthIndex index_;
  SurrogateOptions options_;
};

struct RoundPlan {
  int rounds = 4;
  FilterConfig filter_cfg;
  BootstrapConfig bootstrap_cfg;
  std::string detector = "surrogate";  // "surrogate" or "file"
  std::uint64_t seed = 0;
  std::filesystem::path workdir;

  // Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RoundPlan& plan);
// Missing keys keep their defaults; the result is validated.
RoundPlan round_plan_from_json(const nlohmann::json& j);

struct RunOptions {
  int jobs = 1;
  // Enables per-round evaluation against ground truth.
  const std::vector<GroundTruthFrame>* ground_truth = nullptr;
  // Called once per round with the round's manifest and whether it was
  // reused from disk.
  std::function<void(const RoundManifest&, bool reused)> on_round;
};

std::filesystem::path round_dir(const std::filesystem::path& workdir, int round);

// Bootstraps the corpus into round_0, or into `out_dir` when given (the
// manifest's output_path is then the directory name). `source`, when given,
// only serves the evaluation of a model trained on the result.
RoundManifest run_bootstrap_round(
    const Corpus& corpus, const RoundPlan& plan, const std::string& corpus_hash,
    const DetectorSource* source, const RunOptions& options,
    const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Trains on round_<k-1> (read from disk), infers over every frame, filters
// and writes round_<k>.
RoundManifest run_round(int k, const Corpus& corpus, const RoundPlan& plan,
                        const std::string& corpus_hash,
                        const DetectorSource& source, const RunOptions& options);

// Rounds 0..plan.rounds, reusing completed rounds. Returns all manifests.
std::vector<RoundManifest> run_plan(const RoundPlan& plan, const Corpus& corpus,
                                    const DetectorSource& source,
                                    const RunOptions& options = {});

// The source named by plan.detector. The surrogate requires ground truth.
std::unique_ptr<DetectorSource> make_detector_source(
    const RoundPlan& plan, const Corpus& corpus,
    const std::vector<GroundTruthFrame>* ground_truth);

}  // namespace wsloc
