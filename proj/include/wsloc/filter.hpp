// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multi-round label filtering. A frame's tool predictions are kept only when
// every tool is corroborated by a part box of the kind its class dispatches
// to (tip for SpecialList classes, clevis otherwise) with overlap > tau.

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

enum class RejectReason { kCountMismatch, kNoTools, kLowConfidenceEmpty };

inline constexpr std::array<RejectReason, 3> kAllRejectReasons = {
    RejectReason::kCountMismatch, RejectReason::kNoTools,
    RejectReason::kLowConfidenceEmpty};

std::string_view to_string(RejectReason reason);

// Part kind a tool of the given class is checked against.
PartKind dispatch_kind(const ToolClass& cls);

// Parts of the dispatch kind whose overlap with `tool` is strictly greater
// than cfg.tau; at most 1 under MatchMode::kCapped. Throws RegistryError when
// the tool's label is not a registered class.
int match_count(const Box2D& tool, std::span<const PartDetection> parts,
                const ClassRegistry& registry, const FilterConfig& cfg);

using FilterOutcome = std::variant<PseudoLabelRecord, RejectReason>;

// Drops tools below cfg.min_tool_confidence, then accepts the frame iff the
// summed match count equals the number of remaining tools and that number is
// at least one. `round` is stamped into the record's provenance.
FilterOutcome filter_frame_outcome(const FrameDetections& frame,
                                   const ClassRegistry& registry,
                                   const FilterConfig& cfg, int round = 1);

std::optional<PseudoLabelRecord> filter_frame(const FrameDetections& frame,
                                              const ClassRegistry& registry,
                                              const FilterConfig& cfg,
                                              int round = 1);

struct FilterStats {
  std::int64_t frames_seen = 0;
  std::int64_t frames_accepted = 0;
  std::array<std::int64_t, 3> rejections{};
  std::vector<std::int64_t> per_class_counts;  // indexed by class id

  std::int64_t rejected(RejectReason reason) const {
    return rejections[static_cast<std::size_t>(reason)];
  }
  void add(const FilterStats& other);

  friend bool operator==(const FilterStats&, const FilterStats&) = default;
};

struct FilterResult {
  std::vector<PseudoLabelRecord> records;  // canonical order
  FilterStats stats;
};

FilterResult filter_corpus(std::span<const FrameDetections> frames,
                           const ClassRegistry& registry,
                           const FilterConfig& cfg, int round = 1,
                           int jobs = 1);

}  // namespace wsloc
