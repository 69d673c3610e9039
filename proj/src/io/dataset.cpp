// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "wsloc/digest.hpp"
#include "wsloc/error.hpp"
#include "wsloc/io.hpp"

namespace wsloc {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> label_files(const fs::path& labels_dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(labels_dir)) return files;
  for (const auto& entry : fs::directory_iterator(labels_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  return files;
}

FrameKey parse_stem(const fs::path& file) {
  const std::string stem = file.stem().string();
  const auto sep = stem.rfind('_');
  if (sep == std::string::npos || sep == 0 || sep + 1 == stem.size()) {
    throw FormatError(file.string(), 0, "<name>",
                      "expected <clip_id>_<frame>.txt");
  }
  FrameKey key{stem.substr(0, sep), 0};
  const char* first = stem.data() + sep + 1;
  const char* last = stem.data() + stem.size();
  auto [ptr, ec] = std::from_chars(first, last, key.frame_index);
  if (ec != std::errc() || ptr != last || key.frame_index < 0) {
    throw FormatError(file.string(), 0, "<name>", "bad frame index");
  }
  return key;
}

// Six-decimal rounding can push an edge-touching box up to 1e-6 of the
// image size past the border; pull such coordinates back so the record
// re-exports.
Box2D snap_to_image(const Box2D& b, ImageSize image) {
  auto snap = [](double v, double limit) {
    const double slack = 1e-6 * limit;
    if (v < 0.0 && v >= -slack) return 0.0;
    if (v > limit && v <= limit + slack) return limit;
    return v;
  };
  const double w = image.width;
  const double h = image.height;
  return Box2D(snap(b.x_min(), w), snap(b.y_min(), h), snap(b.x_max(), w),
               snap(b.y_max(), h), b.confidence(), b.label());
}

}  // namespace

std::string format_annotation_line(const Box2D& box, ImageSize image) {
  if (image.width <= 0 || image.height <= 0) {
    throw ExportError("image size must be positive");
  }
  if (!box.within(image)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "box [%g, %g, %g, %g] exceeds image bounds %dx%d",
                  box.x_min(), box.y_min(), box.x_max(), box.y_max(),
                  image.width, image.height);
    throw ExportError(buf);
  }
  if (box.label() < 0) throw ExportError("annotation box has no class label");
  const double w = image.width;
  const double h = image.height;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f\n", box.label(),
                box.center_x() / w, box.center_y() / h, box.width() / w,
                box.height() / h);
  return buf;
}

DatasetSummary write_pseudo_dataset(std::span<const PseudoLabelRecord> records,
                                    ImageSize image, const fs::path& dir,
                                    const ClassRegistry& registry) {
  if (image.width <= 0 || image.height <= 0) {
    throw ExportError("image size must be positive");
  }
  // Render everything before touching the filesystem so a bad box leaves the
  // previous dataset intact.
  std::vector<std::pair<std::string, std::string>> files;
  files.reserve(records.size());
  DatasetSummary summary;
  for (const PseudoLabelRecord& r : records) {
    if (r.entries.empty()) {
      throw ExportError("record " + annotation_stem(r.key()) + " has no entries");
    }
    std::string content;
    for (const Box2D& b : r.entries) {
      registry.at(b.label());
      content += format_annotation_line(b, image);
    }
    files.emplace_back(annotation_stem(r.key()) + ".txt", std::move(content));
    summary.boxes += static_cast<std::int64_t>(r.entries.size());
  }

  const fs::path labels = dir / "labels";
  std::error_code ec;
  fs::create_directories(labels, ec);
  if (ec || !fs::is_directory(labels)) {
    throw InputError("cannot create '" + labels.string() + "'");
  }
  for (const fs::path& stale : label_files(labels)) fs::remove(stale);
  for (const auto& [name, content] : files) {
    std::ofstream out(labels / name, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + (labels / name).string() + "'");
    out << content;
    if (!out) throw InputError("short write to '" + (labels / name).string() + "'");
  }
  write_class_list(dir / "classes.txt", registry);
  summary.files = static_cast<std::int64_t>(files.size());
  return summary;
}

PseudoDataset read_pseudo_dataset(const fs::path& dir, ImageSize image) {
  if (image.width <= 0 || image.height <= 0) {
    throw ValidationError("image size must be positive");
  }
  PseudoDataset dataset;
  dataset.registry = read_class_list(dir / "classes.txt");
  for (const fs::path& file : label_files(dir / "labels")) {
    PseudoLabelRecord record;
    const FrameKey key = parse_stem(file);
    record.clip_id = key.clip_id;
    record.frame_index = key.frame_index;
    std::istringstream in(read_file(file));
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream fields(line);
      int cls = -1;
      double cx = 0, cy = 0, w = 0, h = 0;
      if (!(fields >> cls >> cx >> cy >> w >> h)) {
        throw FormatError(file.string(), line_no, "<line>",
                          "expected 'cls cx cy w h'");
      }
      if (!dataset.registry.contains(cls)) {
        throw FormatError(file.string(), line_no, "cls",
                          "class id " + std::to_string(cls) + " not in classes.txt");
      }
      try {
        const Box2D raw = box_from_center(cx * image.width, cy * image.height,
                                          w * image.width, h * image.height, 1.0, cls);
        record.entries.push_back(snap_to_image(raw, image));
      } catch (const GeometryError& e) {
        throw FormatError(file.string(), line_no, "box", e.what());
      }
    }
    if (record.entries.empty()) {
      throw FormatError(file.string(), 0, "<file>", "empty annotation file");
    }
    dataset.records.push_back(std::move(record));
  }
  sort_canonical(dataset.records);
  return dataset;
}

std::string dataset_digest(const fs::path& dir) {
  Sha256 h;
  h.update_field("classes.txt");
  h.update_field(read_file(dir / "classes.txt"));
  for (const fs::path& file : label_files(dir / "labels")) {
    h.update_field(file.filename().string());
    h.update_field(read_file(file));
  }
  return h.finish();
}

}  // namespace wsloc
