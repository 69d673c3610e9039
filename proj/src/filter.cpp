// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/filter.hpp"

#include <algorithm>

#include "wsloc/error.hpp"
#include "wsloc/parallel.hpp"

namespace wsloc {

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kCountMismatch:
      return "count_mismatch";
    case RejectReason::kNoTools:
      return "no_tools";
    case RejectReason::kLowConfidenceEmpty:
      return "low_confidence_empty";
  }
  return "?";
}

PartKind dispatch_kind(const ToolClass& cls) {
  return cls.is_special ? PartKind::kTip : PartKind::kClevis;
}

int match_count(const Box2D& tool, std::span<const PartDetection> parts,
                const ClassRegistry& registry, const FilterConfig& cfg) {
  const PartKind kind = dispatch_kind(registry.at(tool.label()));
  int count = 0;
  for (const PartDetection& part : parts) {
    if (part.kind != kind) continue;
    // Strict: a part exactly at tau does not corroborate.
    if (overlap(cfg.overlap_metric, part.box, tool) > cfg.tau) ++count;
  }
  if (cfg.match_mode == MatchMode::kCapped) return std::min(count, 1);
  return count;
}

FilterOutcome filter_frame_outcome(const FrameDetections& frame,
                                   const ClassRegistry& registry,
                                   const FilterConfig& cfg, int round) {
  if (frame.tools.empty()) return RejectReason::kNoTools;
  std::vector<Box2D> tools;
  for (const Box2D& t : frame.tools) {
    registry.at(t.label());  // Throws for unregistered labels.
    if (t.confidence() >= cfg.min_tool_confidence) tools.push_back(t);
  }
  if (tools.empty()) return RejectReason::kLowConfidenceEmpty;

  std::size_t select_count = 0;
  for (const Box2D& tool : tools) {
    select_count +=
        static_cast<std::size_t>(match_count(tool, frame.parts, registry, cfg));
  }
  if (select_count != tools.size()) return RejectReason::kCountMismatch;

  PseudoLabelRecord record;
  record.clip_id = frame.clip_id;
  record.frame_index = frame.frame_index;
  record.entries = std::move(tools);
  record.provenance = Provenance{round, cfg.tau, cfg.overlap_metric};
  return record;
}

std::optional<PseudoLabelRecord> filter_frame(const FrameDetections& frame,
                                              const ClassRegistry& registry,
                                              const FilterConfig& cfg,
                                              int round) {
  auto outcome = filter_frame_outcome(frame, registry, cfg, round);
  if (auto* record = std::get_if<PseudoLabelRecord>(&outcome)) {
    return std::move(*record);
  }
  return std::nullopt;
}

void FilterStats::add(const FilterStats& other) {
  frames_seen += other.frames_seen;
  frames_accepted += other.frames_accepted;
  for (std::size_t i = 0; i < rejections.size(); ++i) {
    rejections[i] += other.rejections[i];
  }
  if (per_class_counts.size() < other.per_class_counts.size()) {
    per_class_counts.resize(other.per_class_counts.size(), 0);
  }
  for (std::size_t i = 0; i < other.per_class_counts.size(); ++i) {
    per_class_counts[i] += other.per_class_counts[i];
  }
}

FilterResult filter_corpus(std::span<const FrameDetections> frames,
                           const ClassRegistry& registry,
                           const FilterConfig& cfg, int round, int jobs) {
  cfg.validate();
  std::vector<std::optional<FilterOutcome>> outcomes(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t i) {
    outcomes[i] = filter_frame_outcome(frames[i], registry, cfg, round);
  });

  FilterResult result;
  result.stats.per_class_counts.assign(registry.size(), 0);
  for (auto& outcome : outcomes) {
    ++result.stats.frames_seen;
    if (auto* record = std::get_if<PseudoLabelRecord>(&*outcome)) {
      ++result.stats.frames_accepted;
      for (const Box2D& b : record->entries) {
        ++result.stats.per_class_counts[static_cast<std::size_t>(b.label())];
      }
      result.records.push_back(std::move(*record));
    } else {
      ++result.stats.rejections[static_cast<std::size_t>(
          std::get<RejectReason>(*outcome))];
    }
  }
  sort_canonical(result.records);
  return result;
}

}  // namespace wsloc
