// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/manifest.hpp"

#include "wsloc/digest.hpp"
#include "wsloc/error.hpp"
#include "wsloc/io.hpp"

namespace wsloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDigestKey = "manifest_digest";

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

[[noreturn]] void invariant(const std::string& what) {
  throw ManifestInvariantError("manifest invariant violated: " + what);
}

template <typename T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) invariant(std::string("missing key '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    invariant(std::string("key '") + key + "' has the wrong type");
  }
}

std::map<std::string, std::int64_t> count_map(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_object()) {
    invariant(std::string("'") + key + "' must be an object");
  }
  std::map<std::string, std::int64_t> out;
  for (const auto& [name, v] : it->items()) {
    if (!v.is_number_integer()) invariant(std::string("'") + key + "' holds a non-integer");
    out[name] = v.get<std::int64_t>();
  }
  return out;
}

}  // namespace

void RoundManifest::validate() const {
  if (round < 0) invariant("round must be non-negative");
  if (!(tau > 0.0 && tau < 1.0)) invariant("tau must lie in (0, 1)");
  if (frames_seen < 0 || frames_accepted < 0) invariant("negative frame count");
  if (frames_accepted > frames_seen) invariant("frames_accepted > frames_seen");
  for (const auto& [name, n] : per_class_counts) {
    if (n < 0) invariant("negative count for class '" + name + "'");
  }
  for (const auto& [name, n] : rejections) {
    if (n < 0) invariant("negative rejection count '" + name + "'");
  }
  if (!(min_tool_confidence >= 0.0 && min_tool_confidence <= 1.0)) {
    invariant("min_tool_confidence outside [0, 1]");
  }
  if (stage != "bootstrap" && stage != "filter") {
    invariant("unknown stage '" + stage + "'");
  }
}

json to_json(const RoundManifest& m) {
  json j = {
      {"round", m.round},
      {"tau", m.tau},
      {"overlap_metric", to_string(m.overlap_metric)},
      {"frames_seen", m.frames_seen},
      {"frames_accepted", m.frames_accepted},
      {"per_class_counts", m.per_class_counts},
      {"input_digest", m.input_digest},
      {"output_path", m.output_path},
      {"stage", m.stage},
      {"output_digest", m.output_digest},
      {"corpus_digest", m.corpus_digest},
      {"match_mode", to_string(m.match_mode)},
      {"min_tool_confidence", m.min_tool_confidence},
      {"bootstrap", to_json(m.bootstrap)},
      {"detector", m.detector},
      {"seed", m.seed},
      {"rejections", m.rejections},
  };
  if (m.evaluation) {
    j["evaluation"] = {
        {"label_precision", optional_number(m.evaluation->label_precision)},
        {"label_recall", m.evaluation->label_recall},
        {"model_map", optional_number(m.evaluation->model_map)},
        {"label_match_iou", 0.5},
        {"map_iou_thresholds", "0.50:0.05:0.95"},
        {"ap_interpolation", "101-point"},
    };
  }
  j[kDigestKey] = sha256_digest(j.dump());
  return j;
}

RoundManifest manifest_from_json(const json& j) {
  if (!j.is_object()) invariant("manifest must be a JSON object");
  RoundManifest m;
  m.round = field<int>(j, "round");
  m.tau = field<double>(j, "tau");
  const auto metric = field<std::string>(j, "overlap_metric");
  auto parsed_metric = parse_overlap_metric(metric);
  if (!parsed_metric) invariant("unknown overlap_metric '" + metric + "'");
  m.overlap_metric = *parsed_metric;
  m.frames_seen = field<std::int64_t>(j, "frames_seen");
  m.frames_accepted = field<std::int64_t>(j, "frames_accepted");
  m.per_class_counts = count_map(j, "per_class_counts");
  m.input_digest = field<std::string>(j, "input_digest");
  m.output_path = field<std::string>(j, "output_path");
  m.stage = field<std::string>(j, "stage");
  m.output_digest = field<std::string>(j, "output_digest");
  m.corpus_digest = field<std::string>(j, "corpus_digest");
  const auto mode = field<std::string>(j, "match_mode");
  auto parsed_mode = parse_match_mode(mode);
  if (!parsed_mode) invariant("unknown match_mode '" + mode + "'");
  m.match_mode = *parsed_mode;
  m.min_tool_confidence = field<double>(j, "min_tool_confidence");
  try {
    m.bootstrap = bootstrap_config_from_json(field<json>(j, "bootstrap"));
  } catch (const ConfigError& e) {
    invariant(e.what());
  }
  m.detector = field<std::string>(j, "detector");
  m.seed = field<std::uint64_t>(j, "seed");
  m.rejections = count_map(j, "rejections");
  if (auto ev = j.find("evaluation"); ev != j.end() && !ev->is_null()) {
    RoundEvaluation e;
    if (!ev->is_object()) invariant("'evaluation' must be an object");
    const auto p = field<json>(*ev, "label_precision");
    if (!p.is_null()) e.label_precision = field<double>(*ev, "label_precision");
    e.label_recall = field<double>(*ev, "label_recall");
    const auto mm = field<json>(*ev, "model_map");
    if (!mm.is_null()) e.model_map = field<double>(*ev, "model_map");
    m.evaluation = e;
  }
  m.validate();

  const auto recorded = field<std::string>(j, kDigestKey);
  json body = j;
  body.erase(kDigestKey);
  if (sha256_digest(body.dump()) != recorded) {
    throw IntegrityError("manifest digest mismatch: contents were modified");
  }
  return m;
}

void write_manifest(const RoundManifest& manifest, const fs::path& path) {
  manifest.validate();
  write_file_atomic(path, to_json(manifest).dump(2) + "\n");
}

RoundManifest read_manifest(const fs::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IntegrityError("manifest '" + path.string() +
                         "' is not valid JSON: " + e.what());
  }
  try {
    return manifest_from_json(j);
  } catch (const ManifestInvariantError& e) {
    throw ManifestInvariantError(path.string() + ": " + e.what());
  } catch (const IntegrityError& e) {
    throw IntegrityError(path.string() + ": " + e.what());
  }
}

}  // namespace wsloc
