// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include "json.hpp"
#include "wsloc/error.hpp"
#include "wsloc/io.hpp"

namespace wsloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct LineContext {
  const std::string& source;
  std::int64_t line;

  [[noreturn]] void fail(const std::string& field,
                         const std::string& what) const {
    throw FormatError(source, line, field, what);
  }
};

double number_field(const json& obj, const char* key, const std::string& field,
                    const LineContext& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) ctx.fail(field + "." + key, "missing");
  if (!it->is_number()) ctx.fail(field + "." + key, "expected a number");
  return it->get<double>();
}

Box2D parse_box(const json& obj, const std::string& field,
                const LineContext& ctx) {
  auto it = obj.find("box");
  if (it == obj.end()) ctx.fail(field + ".box", "missing");
  if (!it->is_array() || it->size() != 4) {
    ctx.fail(field + ".box", "expected [x_min, y_min, x_max, y_max]");
  }
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(*it)[i].is_number()) ctx.fail(field + ".box", "non-numeric coordinate");
    c[i] = (*it)[i].get<double>();
  }
  double conf = 1.0;
  if (obj.contains("conf")) conf = number_field(obj, "conf", field, ctx);
  if (!(conf >= 0.0 && conf <= 1.0)) {
    ctx.fail(field + ".conf", "confidence " + std::to_string(conf) +
                                  " outside [0, 1]");
  }
  try {
    return Box2D(c[0], c[1], c[2], c[3], conf);
  } catch (const GeometryError& e) {
    ctx.fail(field + ".box", e.what());
  }
}

json box_json(const Box2D& b) {
  return json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()});
}

}  // namespace

FrameDetections parse_detections_line(std::string_view text,
                                      const ClassRegistry& registry,
                                      const std::string& source,
                                      std::int64_t line,
                                      std::optional<std::string>* digest) {
  const LineContext ctx{source, line};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    ctx.fail("<line>", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) ctx.fail("<line>", "expected a JSON object");

  FrameDetections frame;
  auto clip = j.find("clip_id");
  if (clip == j.end() || !clip->is_string()) {
    ctx.fail("clip_id", "missing or not a string");
  }
  frame.clip_id = clip->get<std::string>();
  if (frame.clip_id.empty()) ctx.fail("clip_id", "empty");

  auto idx = j.find("frame");
  if (idx == j.end() || !idx->is_number_integer()) {
    ctx.fail("frame", "missing or not an integer");
  }
  frame.frame_index = idx->get<std::int64_t>();
  if (frame.frame_index < 0) ctx.fail("frame", "negative frame index");

  auto parts = j.find("parts");
  if (parts == j.end() || !parts->is_array()) {
    ctx.fail("parts", "missing or not an array");
  }
  for (std::size_t i = 0; i < parts->size(); ++i) {
    const std::string field = "parts[" + std::to_string(i) + "]";
    const json& p = (*parts)[i];
    if (!p.is_object()) ctx.fail(field, "expected an object");
    auto kind_it = p.find("kind");
    if (kind_it == p.end() || !kind_it->is_string()) {
      ctx.fail(field + ".kind", "missing or not a string");
    }
    const auto kind_name = kind_it->get<std::string>();
    auto kind = parse_part_kind(kind_name);
    if (!kind) ctx.fail(field + ".kind", "unknown part kind '" + kind_name + "'");
    frame.parts.push_back({parse_box(p, field, ctx), *kind});
  }

  if (auto tools = j.find("tools"); tools != j.end()) {
    if (!tools->is_array()) ctx.fail("tools", "not an array");
    for (std::size_t i = 0; i < tools->size(); ++i) {
      const std::string field = "tools[" + std::to_string(i) + "]";
      const json& t = (*tools)[i];
      if (!t.is_object()) ctx.fail(field, "expected an object");
      auto cls = t.find("class");
      if (cls == t.end() || !cls->is_string()) {
        ctx.fail(field + ".class", "missing or not a string");
      }
      const auto name = cls->get<std::string>();
      auto id = registry.find(name);
      if (!id) ctx.fail(field + ".class", "unknown class '" + name + "'");
      frame.tools.push_back(parse_box(t, field, ctx).with_label(*id));
    }
  }

  if (digest != nullptr) {
    digest->reset();
    if (auto d = j.find("train_digest"); d != j.end()) {
      if (!d->is_string()) ctx.fail("train_digest", "not a string");
      *digest = d->get<std::string>();
    }
  }
  return frame;
}

DetectionReader::DetectionReader(fs::path path, const ClassRegistry& registry)
    : path_(std::move(path)), registry_(&registry), in_(path_) {
  if (!in_) throw InputError("cannot open detections file '" + path_.string() + "'");
}

std::optional<FrameDetections> DetectionReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    return parse_detections_line(text, *registry_, path_.string(), line_,
                                 &training_digest_);
  }
  return std::nullopt;
}

std::vector<FrameDetections> read_detections(const fs::path& path,
                                             const ClassRegistry& registry) {
  DetectionReader reader(path, registry);
  std::vector<FrameDetections> frames;
  while (auto frame = reader.next()) frames.push_back(std::move(*frame));
  return frames;
}

std::string format_detections_line(
    const FrameDetections& frame, const ClassRegistry& registry,
    std::optional<std::string_view> training_digest) {
  json parts = json::array();
  for (const PartDetection& p : frame.parts) {
    parts.push_back({{"kind", to_string(p.kind)},
                     {"box", box_json(p.box)},
                     {"conf", p.box.confidence()}});
  }
  // Key order is fixed by nlohmann's sorted object map.
  json j = {{"clip_id", frame.clip_id},
            {"frame", frame.frame_index},
            {"parts", std::move(parts)}};
  if (!frame.tools.empty()) {
    json tools = json::array();
    for (const Box2D& t : frame.tools) {
      tools.push_back({{"class", registry.at(t.label()).name},
                       {"box", box_json(t)},
                       {"conf", t.confidence()}});
    }
    j["tools"] = std::move(tools);
  }
  if (training_digest) j["train_digest"] = std::string(*training_digest);
  return j.dump();
}

void write_detections(const fs::path& path,
                      std::span<const FrameDetections> frames,
                      const ClassRegistry& registry,
                      std::optional<std::string_view> training_digest) {
  std::string out;
  for (const FrameDetections& f : frames) {
    out += format_detections_line(f, registry, training_digest);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<std::string> scan_tool_class_names(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::vector<std::string> names;
  std::set<std::string> seen;
  std::string text;
  std::int64_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(path.string(), line, "<line>",
                        std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("tools") || !j["tools"].is_array()) continue;
    for (const json& t : j["tools"]) {
      if (!t.is_object() || !t.contains("class") || !t["class"].is_string()) continue;
      auto name = t["class"].get<std::string>();
      auto normalized = normalize_class_name(name);
      if (seen.insert(normalized).second) names.push_back(name);
    }
  }
  return names;
}

}  // namespace wsloc
