// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Domain vocabulary: instrument parts, tool classes, clip captions and the
// per-frame records that flow between pipeline stages.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wsloc/geometry.hpp"

namespace wsloc {

enum class PartKind { kShaft, kClevis, kTip };

inline constexpr std::array<PartKind, 3> kAllPartKinds = {
    PartKind::kShaft, PartKind::kClevis, PartKind::kTip};

std::string_view to_string(PartKind kind);
std::optional<PartKind> parse_part_kind(std::string_view text);

// Classes whose consistency check runs against the tip box instead of the
// clevis box.
inline constexpr std::array<std::string_view, 5> kSpecialList = {
    "monopolar curved scissors", "tip-up fenestrated grasper",
    "suction irrigator", "stapler", "grasping retractor"};

// Lower-cases ASCII letters, trims, and collapses whitespace runs to a single
// space.
std::string normalize_class_name(std::string_view name);

bool is_special_name(std::string_view name);

struct ToolClass {
  std::string name;
  int id = 0;
  bool is_special = false;

  friend bool operator==(const ToolClass&, const ToolClass&) = default;
};

// Immutable name <-> id table. Ids follow input order, starting at 0.
class ClassRegistry {
 public:
  ClassRegistry() = default;

  // Throws RegistryError on empty input, blank names, or names that collide
  // after normalization.
  static ClassRegistry build(const std::vector<std::string>& names);

  std::size_t size() const { return classes_.size(); }
  bool empty() const { return classes_.empty(); }
  bool contains(int id) const {
    return id >= 0 && static_cast<std::size_t>(id) < classes_.size();
  }

  const ToolClass& at(int id) const;
  std::optional<int> find(std::string_view name) const;
  // Like find(), but throws RegistryError naming the unknown class.
  int id_of(std::string_view name) const;

  const std::vector<ToolClass>& classes() const { return classes_; }
  std::vector<std::string> names() const;

  friend bool operator==(const ClassRegistry& a, const ClassRegistry& b) {
    return a.classes_ == b.classes_;
  }

 private:
  std::vector<ToolClass> classes_;
  std::map<std::string, int, std::less<>> by_normalized_name_;
};

struct FrameKey {
  std::string clip_id;
  std::int64_t frame_index = 0;

  friend auto operator<=>(const FrameKey&, const FrameKey&) = default;
  friend bool operator==(const FrameKey&, const FrameKey&) = default;
};

// `<clip_id>_<frame:06d>`, the stem of a per-frame annotation file.
std::string annotation_stem(const FrameKey& key);

struct PartDetection {
  Box2D box;
  PartKind kind;

  friend bool operator==(const PartDetection&, const PartDetection&) = default;
};

struct FrameDetections {
  std::string clip_id;
  std::int64_t frame_index = 0;
  std::vector<PartDetection> parts;
  // Labels are class ids; empty before the first tools detector exists.
  std::vector<Box2D> tools;

  FrameKey key() const { return {clip_id, frame_index}; }

  friend bool operator==(const FrameDetections&,
                         const FrameDetections&) = default;
};

// Ordered class ids of the instruments mounted in a clip.
struct ClipCaption {
  std::string clip_id;
  std::vector<int> tools;

  friend bool operator==(const ClipCaption&, const ClipCaption&) = default;
};

using CaptionMap = std::map<std::string, ClipCaption, std::less<>>;

struct Provenance {
  int round = 0;
  // Absent for bootstrap records, which never pass through the filter.
  std::optional<double> tau;
  OverlapMetric overlap_metric = OverlapMetric::kIou;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// An accepted frame: tool boxes whose labels are class ids.
struct PseudoLabelRecord {
  std::string clip_id;
  std::int64_t frame_index = 0;
  std::vector<Box2D> entries;
  Provenance provenance;

  FrameKey key() const { return {clip_id, frame_index}; }

  friend bool operator==(const PseudoLabelRecord&,
                         const PseudoLabelRecord&) = default;
};

void sort_canonical(std::vector<PseudoLabelRecord>& records);

}  // namespace wsloc
