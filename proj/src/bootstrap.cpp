// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/bootstrap.hpp"

#include <algorithm>

#include "wsloc/error.hpp"
#include "wsloc/parallel.hpp"

namespace wsloc {

namespace {

std::vector<Box2D> confident_parts(const FrameDetections& frame, PartKind kind,
                                   double floor) {
  std::vector<Box2D> out;
  for (const PartDetection& p : frame.parts) {
    if (p.kind == kind && p.box.confidence() >= floor) out.push_back(p.box);
  }
  return out;
}

bool any_part_of_kind(const FrameDetections& frame, PartKind kind) {
  return std::any_of(frame.parts.begin(), frame.parts.end(),
                     [&](const PartDetection& p) { return p.kind == kind; });
}

}  // namespace

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::kWrongAnchorCount:
      return "wrong_anchor_count";
    case SkipReason::kCaptionLengthMismatch:
      return "caption_length_mismatch";
    case SkipReason::kLowConfidenceOnly:
      return "low_confidence_only";
  }
  return "?";
}

void BootstrapStats::add(const BootstrapStats& other) {
  frames_seen += other.frames_seen;
  frames_accepted += other.frames_accepted;
  for (std::size_t i = 0; i < skips.size(); ++i) skips[i] += other.skips[i];
}

std::vector<Box2D> anchor_boxes(const FrameDetections& frame,
                                const ClipCaption& caption,
                                const ClassRegistry& registry,
                                const BootstrapConfig& cfg) {
  const double floor = cfg.min_part_confidence;
  if (cfg.anchor_rule == AnchorRule::kClevisOnly) {
    return confident_parts(frame, PartKind::kClevis, floor);
  }
  std::size_t specials = 0;
  for (int id : caption.tools) specials += registry.at(id).is_special ? 1 : 0;
  if (specials == 0) return confident_parts(frame, PartKind::kClevis, floor);
  if (specials == caption.tools.size()) {
    return confident_parts(frame, PartKind::kTip, floor);
  }

  std::vector<Box2D> clevises = confident_parts(frame, PartKind::kClevis, floor);
  if (clevises.size() != caption.tools.size()) return clevises;
  const std::vector<Box2D> tips = confident_parts(frame, PartKind::kTip, floor);
  std::vector<bool> used(tips.size(), false);

  std::vector<Box2D> anchors;
  std::size_t position = 0;
  for (std::size_t slot : left_to_right_order(clevises)) {
    const Box2D& clevis = clevises[slot];
    if (!registry.at(caption.tools[position++]).is_special) {
      anchors.push_back(clevis);
      continue;
    }
    std::optional<std::size_t> best;
    double best_overlap = 0.0;
    for (std::size_t t = 0; t < tips.size(); ++t) {
      if (used[t]) continue;
      const double o = intersection_over_min(tips[t], clevis);
      if (o > best_overlap) {
        best_overlap = o;
        best = t;
      }
    }
    if (best) {
      used[*best] = true;
      anchors.push_back(tips[*best]);
    }
  }
  return anchors;
}

BootstrapOutcome bootstrap_frame_outcome(const FrameDetections& frame,
                                         const ClipCaption& caption,
                                         const ClassRegistry& registry,
                                         const BootstrapConfig& cfg) {
  if (caption.tools.size() !=
      static_cast<std::size_t>(cfg.required_tool_count)) {
    return SkipReason::kCaptionLengthMismatch;
  }
  std::vector<Box2D> anchors = anchor_boxes(frame, caption, registry, cfg);
  if (anchors.empty()) {
    const bool had_candidates =
        any_part_of_kind(frame, PartKind::kClevis) ||
        (cfg.anchor_rule == AnchorRule::kClevisOrSpecialTip &&
         any_part_of_kind(frame, PartKind::kTip));
    return had_candidates ? SkipReason::kLowConfidenceOnly
                          : SkipReason::kWrongAnchorCount;
  }
  if (anchors.size() != caption.tools.size()) return SkipReason::kWrongAnchorCount;

  PseudoLabelRecord record;
  record.clip_id = frame.clip_id;
  record.frame_index = frame.frame_index;
  record.provenance = Provenance{0, std::nullopt, OverlapMetric::kIou};
  const auto order = left_to_right_order(anchors);
  for (std::size_t i = 0; i < order.size(); ++i) {
    record.entries.push_back(anchors[order[i]].with_label(caption.tools[i]));
  }
  return record;
}

std::optional<PseudoLabelRecord> bootstrap_frame(const FrameDetections& frame,
                                                 const ClipCaption& caption,
                                                 const ClassRegistry& registry,
                                                 const BootstrapConfig& cfg) {
  auto outcome = bootstrap_frame_outcome(frame, caption, registry, cfg);
  if (auto* record = std::get_if<PseudoLabelRecord>(&outcome)) {
    return std::move(*record);
  }
  return std::nullopt;
}

BootstrapResult bootstrap_corpus(std::span<const FrameDetections> frames,
                                 const CaptionMap& captions,
                                 const ClassRegistry& registry,
                                 const BootstrapConfig& cfg, int jobs) {
  cfg.validate();
  std::vector<const ClipCaption*> caption_of(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto it = captions.find(frames[i].clip_id);
    if (it == captions.end()) {
      throw ValidationError("no caption for clip '" + frames[i].clip_id + "'");
    }
    caption_of[i] = &it->second;
  }

  std::vector<std::optional<BootstrapOutcome>> outcomes(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t i) {
    outcomes[i] = bootstrap_frame_outcome(frames[i], *caption_of[i], registry, cfg);
  });

  BootstrapResult result;
  for (auto& outcome : outcomes) {
    ++result.stats.frames_seen;
    if (auto* record = std::get_if<PseudoLabelRecord>(&*outcome)) {
      ++result.stats.frames_accepted;
      result.records.push_back(std::move(*record));
    } else {
      ++result.stats.skips[static_cast<std::size_t>(std::get<SkipReason>(*outcome))];
    }
  }
  sort_canonical(result.records);
  return result;
}

}  // namespace wsloc
