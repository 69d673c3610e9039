// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "wsloc/error.hpp"
#include "wsloc/io.hpp"

namespace wsloc {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_row(std::string_view row) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const char c = row[i];
    if (quoted) {
      if (c == '"' && i + 1 < row.size() && row[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string format_class_list(const ClassRegistry& registry) {
  std::string out;
  for (const ToolClass& c : registry.classes()) {
    out += c.name;
    out += '\n';
  }
  return out;
}

ClassRegistry read_class_list(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(trim(line));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    // A blank line would shift every following id.
    if (lines[i].empty()) {
      throw FormatError(path.string(), static_cast<std::int64_t>(i) + 1,
                        "name", "blank class name");
    }
  }
  return ClassRegistry::build(lines);
}

void write_class_list(const fs::path& path, const ClassRegistry& registry) {
  write_file_atomic(path, format_class_list(registry));
}

CaptionMap read_captions(const fs::path& path, const ClassRegistry& registry) {
  std::istringstream in(read_file(path));
  CaptionMap captions;
  std::string row;
  std::int64_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (trim(row).empty()) continue;
    auto cells = split_csv_row(row);
    if (line == 1 && normalize_class_name(cells[0]) == "clip_id") continue;

    ClipCaption caption;
    caption.clip_id = cells[0];
    if (caption.clip_id.empty()) {
      throw FormatError(path.string(), line, "clip_id", "empty clip id");
    }
    bool tail = false;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const std::string field = "tool_" + std::to_string(i);
      if (cells[i].empty()) {
        tail = true;
        continue;
      }
      if (tail) {
        throw FormatError(path.string(), line, field,
                          "tool after an empty cell");
      }
      auto id = registry.find(cells[i]);
      if (!id) {
        throw FormatError(path.string(), line, field,
                          "unknown class '" + cells[i] + "'");
      }
      caption.tools.push_back(*id);
    }
    if (caption.tools.empty()) {
      throw FormatError(path.string(), line, "tool_1", "caption lists no tools");
    }
    const std::string clip = caption.clip_id;
    if (!captions.emplace(clip, std::move(caption)).second) {
      throw FormatError(path.string(), line, "clip_id",
                        "duplicate clip id '" + clip + "'");
    }
  }
  return captions;
}

std::string format_captions(const CaptionMap& captions,
                            const ClassRegistry& registry) {
  std::size_t width = 1;
  for (const auto& [clip, caption] : captions) {
    width = std::max(width, caption.tools.size());
  }
  std::string out = "clip_id";
  for (std::size_t i = 1; i <= width; ++i) out += ",tool_" + std::to_string(i);
  out += '\n';
  for (const auto& [clip, caption] : captions) {
    out += csv_cell(clip);
    for (std::size_t i = 0; i < width; ++i) {
      out += ',';
      if (i < caption.tools.size()) out += csv_cell(registry.at(caption.tools[i]).name);
    }
    out += '\n';
  }
  return out;
}

void write_captions(const fs::path& path, const CaptionMap& captions,
                    const ClassRegistry& registry) {
  write_file_atomic(path, format_captions(captions, registry));
}

}  // namespace wsloc
