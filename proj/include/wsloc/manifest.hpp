// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "wsloc/config.hpp"
#include "wsloc/geometry.hpp"

namespace wsloc {

// Ground-truth quality of a round's dataset, present when ground truth was
// supplied to the run.
struct RoundEvaluation {
  std::optional<double> label_precision;  // null when nothing was emitted
  double label_recall = 0.0;
  // mAP@[.5:.05:.95] of the detector trained on this round's dataset, when the
  // detector can be trained in-process.
  std::optional<double> model_map;

  friend bool operator==(const RoundEvaluation&,
                         const RoundEvaluation&) = default;
};

// Provenance of one round. The first eight fields are the core record; the
// rest tie the round to its inputs and parameters so that a workdir can be
// validated and resumed.
struct RoundManifest {
  int round = 0;
  double tau = 0.8;
  OverlapMetric overlap_metric = OverlapMetric::kIou;
  std::int64_t frames_seen = 0;
  std::int64_t frames_accepted = 0;
  std::map<std::string, std::int64_t> per_class_counts;
  std::string input_digest;
  std::string output_path;

  std::string stage;  // "bootstrap" or "filter"
  std::string output_digest;
  std::string corpus_digest;
  MatchMode match_mode = MatchMode::kCapped;
  double min_tool_confidence = 0.25;
  BootstrapConfig bootstrap;
  std::string detector;
  std::uint64_t seed = 0;
  std::map<std::string, std::int64_t> rejections;
  std::optional<RoundEvaluation> evaluation;

  // Throws ManifestInvariantError.
  void validate() const;

  friend bool operator==(const RoundManifest&, const RoundManifest&) = default;
};

// JSON form including the "manifest_digest" self-hash.
nlohmann::json to_json(const RoundManifest& manifest);
// Checks invariants first, then the self-hash.
RoundManifest manifest_from_json(const nlohmann::json& j);

// Pretty-printed JSON, written atomically.
void write_manifest(const RoundManifest& manifest,
                    const std::filesystem::path& path);
RoundManifest read_manifest(const std::filesystem::path& path);

}  // namespace wsloc
