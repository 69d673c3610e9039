// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// File formats consumed and produced by the pipeline:
//
//   detections.jsonl   one frame per line:
//     {"clip_id": str, "frame": int,
//      "parts": [{"kind": "shaft|clevis|tip", "box": [x0,y0,x1,y1], "conf": f}],
//      "tools": [{"class": str, "box": [...], "conf": f}],   (optional)
//      "train_digest": str}                                   (optional)
//   captions.csv       clip_id,tool_1,...,tool_k (empty trailing cells allowed)
//   classes.txt        one class name per line, line number = class id
//   labels/<clip>_<frame:06d>.txt
//                      "cls cx cy w h" per object, normalized, six decimals

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsloc/geometry.hpp"
#include "wsloc/model.hpp"

namespace wsloc {

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

// ---------------------------------------------------------------------------
// Detections

// Streams frames from a detections file. Tool class names are resolved
// against `registry`; unknown names are a FormatError.
class DetectionReader {
 public:
  DetectionReader(std::filesystem::path path, const ClassRegistry& registry);

  std::optional<FrameDetections> next();

  std::int64_t line_number() const { return line_; }
  // "train_digest" of the frame most recently returned by next().
  const std::optional<std::string>& training_digest() const {
    return training_digest_;
  }

 private:
  std::filesystem::path path_;
  const ClassRegistry* registry_;
  std::ifstream in_;
  std::int64_t line_ = 0;
  std::optional<std::string> training_digest_;
};

FrameDetections parse_detections_line(
    std::string_view text, const ClassRegistry& registry,
    const std::string& source = "<memory>", std::int64_t line = 1,
    std::optional<std::string>* training_digest = nullptr);

std::vector<FrameDetections> read_detections(const std::filesystem::path& path,
                                             const ClassRegistry& registry);

std::string format_detections_line(
    const FrameDetections& frame, const ClassRegistry& registry,
    std::optional<std::string_view> training_digest = std::nullopt);

void write_detections(
    const std::filesystem::path& path, std::span<const FrameDetections> frames,
    const ClassRegistry& registry,
    std::optional<std::string_view> training_digest = std::nullopt);

// Tool class names in first-seen order, without resolving them.
std::vector<std::string> scan_tool_class_names(
    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Class list

std::string format_class_list(const ClassRegistry& registry);
ClassRegistry read_class_list(const std::filesystem::path& path);
void write_class_list(const std::filesystem::path& path,
                      const ClassRegistry& registry);

// ---------------------------------------------------------------------------
// Captions

CaptionMap read_captions(const std::filesystem::path& path,
                         const ClassRegistry& registry);
std::string format_captions(const CaptionMap& captions,
                            const ClassRegistry& registry);
void write_captions(const std::filesystem::path& path,
                    const CaptionMap& captions, const ClassRegistry& registry);

// ---------------------------------------------------------------------------
// Pseudo-label datasets

// "cls cx cy w h\n". Throws ExportError for boxes outside the image.
std::string format_annotation_line(const Box2D& box, ImageSize image);

struct DatasetSummary {
  std::int64_t files = 0;
  std::int64_t boxes = 0;
};

// Writes <dir>/labels/*.txt (replacing any previous label files) and
// <dir>/classes.txt.
DatasetSummary write_pseudo_dataset(std::span<const PseudoLabelRecord> records,
                                    ImageSize image,
                                    const std::filesystem::path& dir,
                                    const ClassRegistry& registry);

struct PseudoDataset {
  ClassRegistry registry;
  // Canonical (clip_id, frame_index) order. Confidences read back as 1.
  std::vector<PseudoLabelRecord> records;
};

PseudoDataset read_pseudo_dataset(const std::filesystem::path& dir,
                                  ImageSize image);

// Content hash over classes.txt and every labels/*.txt file (sorted by name).
std::string dataset_digest(const std::filesystem::path& dir);

}  // namespace wsloc
