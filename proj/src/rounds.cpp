// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/rounds.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "wsloc/bootstrap.hpp"
#include "wsloc/digest.hpp"
#include "wsloc/error.hpp"
#include "wsloc/eval.hpp"
#include "wsloc/filter.hpp"
#include "wsloc/parallel.hpp"

namespace wsloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kDetectionsFile = "detections.jsonl";

class MapToolDetector : public ToolDetector {
 public:
  explicit MapToolDetector(std::map<FrameKey, std::vector<Box2D>> tools)
      : tools_(std::move(tools)) {}

  std::vector<Box2D> detect(const FrameDetections& frame) const override {
    auto it = tools_.find(frame.key());
    return it == tools_.end() ? std::vector<Box2D>{} : it->second;
  }

 private:
  std::map<FrameKey, std::vector<Box2D>> tools_;
};

class SurrogateToolDetector : public ToolDetector {
 public:
  SurrogateToolDetector(SurrogateDetector detector, const GroundTruthIndex& index)
      : detector_(std::move(detector)), index_(&index) {}

  std::vector<Box2D> detect(const FrameDetections& frame) const override {
    const GroundTruthFrame* gt = index_->find(frame.key());
    return gt == nullptr ? std::vector<Box2D>{} : detector_.infer(*gt);
  }

 private:
  SurrogateDetector detector_;
  const GroundTruthIndex* index_;
};

std::map<std::string, std::int64_t> class_counts(
    const ClassRegistry& registry, std::span<const PseudoLabelRecord> records) {
  std::map<std::string, std::int64_t> counts;
  for (const ToolClass& c : registry.classes()) counts[c.name] = 0;
  for (const PseudoLabelRecord& r : records) {
    for (const Box2D& b : r.entries) ++counts[registry.at(b.label()).name];
  }
  return counts;
}

// Fields that tie a manifest to its inputs and parameters.
RoundManifest identity(int k, const RoundPlan& plan, const std::string& corpus_hash,
                       const std::string& input_digest) {
  RoundManifest m;
  m.round = k;
  m.tau = plan.filter_cfg.tau;
  m.overlap_metric = plan.filter_cfg.overlap_metric;
  m.input_digest = input_digest;
  m.output_path = "round_" + std::to_string(k);
  m.stage = k == 0 ? "bootstrap" : "filter";
  m.corpus_digest = corpus_hash;
  m.match_mode = plan.filter_cfg.match_mode;
  m.min_tool_confidence = plan.filter_cfg.min_tool_confidence;
  m.bootstrap = plan.bootstrap_cfg;
  m.detector = plan.detector;
  m.seed = plan.seed;
  return m;
}

// Round 0 depends on the bootstrap parameters only, so a dataset written by a
// standalone bootstrap can seed any plan.
bool same_identity(const RoundManifest& a, const RoundManifest& b) {
  const bool common = a.round == b.round && a.input_digest == b.input_digest &&
                      a.output_path == b.output_path && a.stage == b.stage &&
                      a.corpus_digest == b.corpus_digest &&
                      a.bootstrap == b.bootstrap;
  if (b.round == 0) return common;
  return common && a.tau == b.tau &&
         a.overlap_metric == b.overlap_metric &&
         a.input_digest == b.input_digest && a.output_path == b.output_path &&
         a.stage == b.stage && a.corpus_digest == b.corpus_digest &&
         a.match_mode == b.match_mode &&
         a.min_tool_confidence == b.min_tool_confidence &&
         a.bootstrap == b.bootstrap && a.detector == b.detector &&
         a.seed == b.seed;
}

PseudoDataset read_round_dataset(const fs::path& dir, const Corpus& corpus) {
  PseudoDataset ds = read_pseudo_dataset(dir, corpus.image_size);
  if (!(ds.registry == corpus.registry)) {
    throw IntegrityError("class list in '" + dir.string() +
                         "' differs from the corpus classes");
  }
  return ds;
}

// Persists a round's records and fills the dataset-dependent manifest fields.
RoundManifest finish_round(RoundManifest m, std::span<const PseudoLabelRecord> records,
                           const Corpus& corpus, const fs::path& dir,
                           const DetectorSource* source, const RunOptions& options) {
  write_pseudo_dataset(records, corpus.image_size, dir, corpus.registry);
  m.output_digest = dataset_digest(dir);
  m.per_class_counts = class_counts(corpus.registry, records);
  if (options.ground_truth != nullptr) {
    const PseudoDataset written = read_round_dataset(dir, corpus);
    const auto gt = ground_truth_eval_frames(*options.ground_truth);
    const LabelQuality q =
        label_quality(written.records, gt, corpus.registry.size());
    RoundEvaluation ev;
    ev.label_precision = q.precision;
    ev.label_recall = q.recall;
    if (source != nullptr) ev.model_map = source->model_map(written, options.jobs);
    m.evaluation = ev;
  }
  m.validate();
  write_manifest(m, dir / kManifestFile);
  return m;
}

void check_corpus(const Corpus& corpus) {
  if (corpus.registry.empty()) throw ValidationError("corpus has no classes");
  if (corpus.image_size.width <= 0 || corpus.image_size.height <= 0) {
    throw ConfigError("image size must be positive");
  }
  std::vector<FrameKey> keys;
  keys.reserve(corpus.frames.size());
  for (const FrameDetections& f : corpus.frames) keys.push_back(f.key());
  std::sort(keys.begin(), keys.end());
  auto dup = std::adjacent_find(keys.begin(), keys.end());
  if (dup != keys.end()) {
    throw ValidationError("duplicate frame " + dup->clip_id + " #" +
                          std::to_string(dup->frame_index) + " in corpus");
  }
}

}  // namespace

std::string corpus_digest(const Corpus& corpus) {
  Sha256 h;
  h.update_field("wsloc-corpus-v1");
  h.update_field(format_class_list(corpus.registry));
  h.update_field(std::to_string(corpus.image_size.width) + "x" +
                 std::to_string(corpus.image_size.height));
  h.update_field(format_captions(corpus.captions, corpus.registry));
  std::vector<std::size_t> order(corpus.frames.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return corpus.frames[a].key() < corpus.frames[b].key();
  });
  for (std::size_t i : order) {
    FrameDetections parts_only = corpus.frames[i];
    parts_only.tools.clear();
    h.update_field(format_detections_line(parts_only, corpus.registry));
  }
  return h.finish();
}

FileDetectorSource::FileDetectorSource(ClassRegistry registry)
    : registry_(std::move(registry)) {}

std::unique_ptr<ToolDetector> FileDetectorSource::train(
    int round, const PseudoDataset&, const std::string& dataset_digest,
    const fs::path& workdir) const {
  const fs::path path = round_dir(workdir, round) / kDetectionsFile;
  if (!fs::exists(path)) {
    throw InputError("round " + std::to_string(round) +
                     " needs externally produced detections at '" +
                     path.string() + "'");
  }
  DetectionReader reader(path, registry_);
  std::map<FrameKey, std::vector<Box2D>> tools;
  while (auto frame = reader.next()) {
    const auto& declared = reader.training_digest();
    if (!declared || *declared != dataset_digest) {
      throw StalenessError(
          path.string() + ":" + std::to_string(reader.line_number()) +
          ": detections were produced by a model trained on " +
          (declared ? *declared : std::string("an undeclared dataset")) +
          ", expected " + dataset_digest);
    }
    auto& slot = tools[frame->key()];
    slot.insert(slot.end(), frame->tools.begin(), frame->tools.end());
  }
  return std::make_unique<MapToolDetector>(std::move(tools));
}

SurrogateDetectorSource::SurrogateDetectorSource(
    ClassRegistry registry, const std::vector<GroundTruthFrame>& ground_truth,
    SurrogateOptions options)
    : registry_(std::move(registry)),
      ground_truth_(&ground_truth),
      index_(ground_truth),
      options_(options) {}

SurrogateDetector SurrogateDetectorSource::fit(const PseudoDataset& dataset) const {
  return surrogate_train(dataset.records, index_, registry_, options_);
}

std::unique_ptr<ToolDetector> SurrogateDetectorSource::train(
    int, const PseudoDataset& dataset, const std::string&, const fs::path&) const {
  return std::make_unique<SurrogateToolDetector>(fit(dataset), index_);
}

std::optional<double> SurrogateDetectorSource::model_map(
    const PseudoDataset& dataset, int jobs) const {
  if (dataset.records.empty()) return std::nullopt;
  const SurrogateDetector det = fit(dataset);
  std::vector<EvalFrame> preds(ground_truth_->size());
  parallel_for(preds.size(), jobs, [&](std::size_t i) {
    const GroundTruthFrame& gt = (*ground_truth_)[i];
    preds[i] = EvalFrame{gt.key(), det.infer(gt)};
  });
  const auto gt = ground_truth_eval_frames(*ground_truth_);
  const auto thresholds = coco_iou_thresholds();
  return evaluate_map(preds, gt, thresholds, jobs).map;
}

void RoundPlan::validate() const {
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  filter_cfg.validate();
  bootstrap_cfg.validate();
  if (detector != "surrogate" && detector != "file") {
    throw ConfigError("unknown detector '" + detector +
                      "' (expected surrogate or file)");
  }
  if (workdir.empty()) throw ConfigError("workdir is not set");
}

json to_json(const RoundPlan& plan) {
  return {{"rounds", plan.rounds},
          {"filter", to_json(plan.filter_cfg)},
          {"bootstrap", to_json(plan.bootstrap_cfg)},
          {"detector", plan.detector},
          {"seed", plan.seed},
          {"workdir", plan.workdir.string()}};
}

RoundPlan round_plan_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("plan must be a JSON object");
  RoundPlan plan;
  try {
    if (j.contains("rounds")) plan.rounds = j.at("rounds").get<int>();
    if (j.contains("filter")) plan.filter_cfg = filter_config_from_json(j.at("filter"));
    if (j.contains("bootstrap")) {
      plan.bootstrap_cfg = bootstrap_config_from_json(j.at("bootstrap"));
    }
    if (j.contains("detector")) plan.detector = j.at("detector").get<std::string>();
    if (j.contains("seed")) plan.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workdir")) plan.workdir = j.at("workdir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

fs::path round_dir(const fs::path& workdir, int round) {
  return workdir / ("round_" + std::to_string(round));
}

RoundManifest run_bootstrap_round(const Corpus& corpus, const RoundPlan& plan,
                                  const std::string& corpus_hash,
                                  const DetectorSource* source,
                                  const RunOptions& options,
                                  const std::optional<fs::path>& out_dir) {
  const BootstrapResult boot = bootstrap_corpus(
      corpus.frames, corpus.captions, corpus.registry, plan.bootstrap_cfg,
      options.jobs);
  RoundManifest m = identity(0, plan, corpus_hash, corpus_hash);
  m.frames_seen = boot.stats.frames_seen;
  m.frames_accepted = boot.stats.frames_accepted;
  for (SkipReason r : kAllSkipReasons) {
    m.rejections[std::string(to_string(r))] = boot.stats.skipped(r);
  }
  fs::path dir = round_dir(plan.workdir, 0);
  if (out_dir) {
    dir = *out_dir;
    m.output_path = dir.lexically_normal().filename().string();
    if (m.output_path.empty()) m.output_path = dir.lexically_normal().parent_path().filename().string();
  }
  return finish_round(std::move(m), boot.records, corpus, dir, source, options);
}

RoundManifest run_round(int k, const Corpus& corpus, const RoundPlan& plan,
                        const std::string& corpus_hash,
                        const DetectorSource& source, const RunOptions& options) {
  if (k < 1) throw ConfigError("filter rounds start at 1");
  const fs::path prior_dir = round_dir(plan.workdir, k - 1);
  const PseudoDataset prior = read_round_dataset(prior_dir, corpus);
  const std::string prior_digest = dataset_digest(prior_dir);
  const auto detector = source.train(k, prior, prior_digest, plan.workdir);

  std::vector<FrameDetections> frames(corpus.frames.size());
  parallel_for(frames.size(), options.jobs, [&](std::size_t i) {
    frames[i].clip_id = corpus.frames[i].clip_id;
    frames[i].frame_index = corpus.frames[i].frame_index;
    frames[i].parts = corpus.frames[i].parts;
    frames[i].tools = detector->detect(corpus.frames[i]);
  });
  const FilterResult filtered =
      filter_corpus(frames, corpus.registry, plan.filter_cfg, k, options.jobs);

  RoundManifest m = identity(k, plan, corpus_hash, prior_digest);
  m.frames_seen = filtered.stats.frames_seen;
  m.frames_accepted = filtered.stats.frames_accepted;
  for (RejectReason r : kAllRejectReasons) {
    m.rejections[std::string(to_string(r))] = filtered.stats.rejected(r);
  }
  return finish_round(std::move(m), filtered.records, corpus,
                      round_dir(plan.workdir, k), &source, options);
}

std::vector<RoundManifest> run_plan(const RoundPlan& plan, const Corpus& corpus,
                                    const DetectorSource& source,
                                    const RunOptions& options) {
  plan.validate();
  check_corpus(corpus);
  if (source.name() != plan.detector) {
    throw ConfigError("plan names detector '" + plan.detector +
                      "' but a '" + source.name() + "' source was supplied");
  }
  const std::string corpus_hash = corpus_digest(corpus);
  std::vector<RoundManifest> manifests;
  std::string input_digest = corpus_hash;
  for (int k = 0; k <= plan.rounds; ++k) {
    const fs::path dir = round_dir(plan.workdir, k);
    const fs::path manifest_path = dir / kManifestFile;
    bool reused = false;
    RoundManifest m;
    if (fs::exists(manifest_path)) {
      m = read_manifest(manifest_path);
      if (!same_identity(m, identity(k, plan, corpus_hash, input_digest))) {
        throw StalenessError("'" + manifest_path.string() +
                             "' was produced from different inputs or "
                             "parameters; use a fresh workdir");
      }
      const std::string actual = dataset_digest(dir);
      if (actual != m.output_digest) {
        throw IntegrityError("dataset in '" + dir.string() + "' hashes to " +
                             actual + " but its manifest records " +
                             m.output_digest);
      }
      reused = true;
    } else if (k == 0) {
      m = run_bootstrap_round(corpus, plan, corpus_hash, &source, options);
    } else {
      m = run_round(k, corpus, plan, corpus_hash, source, options);
    }
    if (options.on_round) options.on_round(m, reused);
    input_digest = m.output_digest;
    manifests.push_back(std::move(m));
  }
  return manifests;
}

std::unique_ptr<DetectorSource> make_detector_source(
    const RoundPlan& plan, const Corpus& corpus,
    const std::vector<GroundTruthFrame>* ground_truth) {
  if (plan.detector == "file") {
    return std::make_unique<FileDetectorSource>(corpus.registry);
  }
  if (plan.detector == "surrogate") {
    if (ground_truth == nullptr) {
      throw ConfigError("the surrogate detector needs ground truth");
    }
    SurrogateOptions opts;
    opts.seed = plan.seed;
    opts.image_size = corpus.image_size;
    return std::make_unique<SurrogateDetectorSource>(corpus.registry,
                                                     *ground_truth, opts);
  }
  throw ConfigError("unknown detector '" + plan.detector + "'");
}

}  // namespace wsloc
