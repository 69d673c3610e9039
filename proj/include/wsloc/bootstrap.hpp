// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Round-0 pseudo-labels from clip captions and category-free part boxes.
// Frames whose anchor count matches the caption get the caption's classes
// assigned to their anchors from left to right.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "wsloc/config.hpp"
#include "wsloc/model.hpp"

namespace wsloc {

enum class SkipReason { kWrongAnchorCount, kCaptionLengthMismatch, kLowConfidenceOnly };

inline constexpr std::array<SkipReason, 3> kAllSkipReasons = {
    SkipReason::kWrongAnchorCount, SkipReason::kCaptionLengthMismatch,
    SkipReason::kLowConfidenceOnly};

std::string_view to_string(SkipReason reason);

struct BootstrapStats {
  std::int64_t frames_seen = 0;
  std::int64_t frames_accepted = 0;
  std::array<std::int64_t, 3> skips{};

  std::int64_t skipped(SkipReason reason) const {
    return skips[static_cast<std::size_t>(reason)];
  }
  void add(const BootstrapStats& other);

  friend bool operator==(const BootstrapStats&, const BootstrapStats&) = default;
};

// Anchor candidates above cfg.min_part_confidence.
//
// kClevisOnly: every confident clevis box.
// kClevisOrSpecialTip: caption position i expects a tip when its class is
// special and a clevis otherwise. Captions of a single group return the
// confident boxes of that kind. Mixed captions use the confident clevis boxes
// as instrument slots (left to right); a slot whose caption class is special
// swaps its clevis for the unused confident tip overlapping it most, and is
// dropped when no such tip exists.
std::vector<Box2D> anchor_boxes(const FrameDetections& frame,
                                const ClipCaption& caption,
                                const ClassRegistry& registry,
                                const BootstrapConfig& cfg);

using BootstrapOutcome = std::variant<PseudoLabelRecord, SkipReason>;

BootstrapOutcome bootstrap_frame_outcome(const FrameDetections& frame,
                                         const ClipCaption& caption,
                                         const ClassRegistry& registry,
                                         const BootstrapConfig& cfg);

std::optional<PseudoLabelRecord> bootstrap_frame(const FrameDetections& frame,
                                                 const ClipCaption& caption,
                                                 const ClassRegistry& registry,
                                                 const BootstrapConfig& cfg);

struct BootstrapResult {
  std::vector<PseudoLabelRecord> records;  // canonical order
  BootstrapStats stats;
};

// Throws ValidationError naming the first clip without a caption.
BootstrapResult bootstrap_corpus(std::span<const FrameDetections> frames,
                                 const CaptionMap& captions,
                                 const ClassRegistry& registry,
                                 const BootstrapConfig& cfg, int jobs = 1);

}  // namespace wsloc
