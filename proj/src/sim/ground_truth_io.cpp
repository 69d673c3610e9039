// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include "json.hpp"
#include "wsloc/error.hpp"
#include "wsloc/io.hpp"
#include "wsloc/sim.hpp"

namespace wsloc {

namespace {

using nlohmann::json;

json box_json(const Box2D& b) {
  return json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()});
}

Box2D box_from_json(const json& j, const std::string& source, std::int64_t line,
                    const std::string& field) {
  if (!j.is_array() || j.size() != 4) {
    throw FormatError(source, line, field, "expected [x_min, y_min, x_max, y_max]");
  }
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[i].is_number()) throw FormatError(source, line, field, "non-numeric coordinate");
    c[i] = j[i].get<double>();
  }
  try {
    return Box2D(c[0], c[1], c[2], c[3]);
  } catch (const GeometryError& e) {
    throw FormatError(source, line, field, e.what());
  }
}

}  // namespace

std::string format_ground_truth_line(const GroundTruthFrame& frame,
                                     const ClassRegistry& registry) {
  FrameDetections det;
  det.clip_id = frame.clip_id;
  det.frame_index = frame.frame_index;
  for (const InstrumentTruth& inst : frame.instruments) {
    for (PartKind kind : kAllPartKinds) det.parts.push_back({inst.part(kind), kind});
    det.tools.push_back(inst.tool_box);
  }
  json j = json::parse(format_detections_line(det, registry));
  j["crossed"] = frame.crossed;
  if (!j.contains("tools")) j["tools"] = json::array();
  for (std::size_t i = 0; i < frame.instruments.size(); ++i) {
    const InstrumentTruth& inst = frame.instruments[i];
    json parts = json::object();
    for (PartKind kind : kAllPartKinds) {
      parts[std::string(to_string(kind))] = box_json(inst.part(kind));
    }
    j["tools"][i]["caption_position"] = inst.caption_position;
    j["tools"][i]["parts"] = std::move(parts);
  }
  return j.dump();
}

void write_ground_truth(const std::filesystem::path& path,
                        std::span<const GroundTruthFrame> frames,
                        const ClassRegistry& registry) {
  std::string out;
  for (const GroundTruthFrame& f : frames) {
    out += format_ground_truth_line(f, registry);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<GroundTruthFrame> read_ground_truth(
    const std::filesystem::path& path, const ClassRegistry& registry) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ground truth file '" + path.string() + "'");
  const std::string source = path.string();
  std::vector<GroundTruthFrame> frames;
  std::string text;
  std::int64_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    // Validates the detections-compatible part of the line.
    const FrameDetections det = parse_detections_line(text, registry, source, line);
    const json j = json::parse(text);

    GroundTruthFrame frame;
    frame.clip_id = det.clip_id;
    frame.frame_index = det.frame_index;
    auto crossed = j.find("crossed");
    if (crossed == j.end() || !crossed->is_boolean()) {
      throw FormatError(source, line, "crossed", "missing or not a boolean");
    }
    frame.crossed = crossed->get<bool>();
    for (std::size_t i = 0; i < det.tools.size(); ++i) {
      const std::string field = "tools[" + std::to_string(i) + "]";
      const json& t = j["tools"][i];
      auto pos = t.find("caption_position");
      if (pos == t.end() || !pos->is_number_integer()) {
        throw FormatError(source, line, field + ".caption_position",
                          "missing or not an integer");
      }
      auto parts = t.find("parts");
      if (parts == t.end() || !parts->is_object()) {
        throw FormatError(source, line, field + ".parts", "missing or not an object");
      }
      auto part = [&](PartKind kind) {
        const std::string name(to_string(kind));
        auto it = parts->find(name);
        if (it == parts->end()) {
          throw FormatError(source, line, field + ".parts." + name, "missing");
        }
        return box_from_json(*it, source, line, field + ".parts." + name);
      };
      const int id = det.tools[i].label();
      const PartKind anchor =
          registry.at(id).is_special ? PartKind::kTip : PartKind::kClevis;
      frame.instruments.push_back(InstrumentTruth{
          id, pos->get<int>(), anchor, det.tools[i].with_confidence(1.0),
          part(PartKind::kShaft), part(PartKind::kClevis), part(PartKind::kTip)});
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace wsloc
