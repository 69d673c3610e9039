// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/model.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "wsloc/error.hpp"

namespace wsloc {

std::string_view to_string(PartKind kind) {
  switch (kind) {
    case PartKind::kShaft:
      return "shaft";
    case PartKind::kClevis:
      return "clevis";
    case PartKind::kTip:
      return "tip";
  }
  return "?";
}

std::optional<PartKind> parse_part_kind(std::string_view text) {
  for (PartKind kind : kAllPartKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string normalize_class_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char raw : name) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

bool is_special_name(std::string_view name) {
  const std::string normalized = normalize_class_name(name);
  return std::find(kSpecialList.begin(), kSpecialList.end(), normalized) !=
         kSpecialList.end();
}

ClassRegistry ClassRegistry::build(const std::vector<std::string>& names) {
  if (names.empty()) throw RegistryError("class registry needs at least one name");
  ClassRegistry registry;
  for (const std::string& raw : names) {
    std::string normalized = normalize_class_name(raw);
    if (normalized.empty()) throw RegistryError("blank class name");
    const int id = static_cast<int>(registry.classes_.size());
    auto [it, inserted] = registry.by_normalized_name_.emplace(normalized, id);
    if (!inserted) {
      throw RegistryError("duplicate class name '" + raw + "' (same as '" +
                          registry.classes_[it->second].name + "')");
    }
    // Keep the caller's spelling, minus surrounding whitespace.
    const auto first = raw.find_first_not_of(" \t\r\n");
    const auto last = raw.find_last_not_of(" \t\r\n");
    registry.classes_.push_back(
        {raw.substr(first, last - first + 1), id, is_special_name(normalized)});
  }
  return registry;
}

const ToolClass& ClassRegistry::at(int id) const {
  if (!contains(id)) {
    throw RegistryError("class id " + std::to_string(id) +
                        " is not registered");
  }
  return classes_[static_cast<std::size_t>(id)];
}

std::optional<int> ClassRegistry::find(std::string_view name) const {
  auto it = by_normalized_name_.find(normalize_class_name(name));
  if (it == by_normalized_name_.end()) return std::nullopt;
  return it->second;
}

int ClassRegistry::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw RegistryError("unknown class '" + std::string(name) + "'");
}

std::vector<std::string> ClassRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(classes_.size());
  for (const ToolClass& c : classes_) out.push_back(c.name);
  return out;
}

std::string annotation_stem(const FrameKey& key) {
  char frame[32];
  std::snprintf(frame, sizeof(frame), "%06lld",
                static_cast<long long>(key.frame_index));
  return key.clip_id + "_" + frame;
}

void sort_canonical(std::vector<PseudoLabelRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const PseudoLabelRecord& a, const PseudoLabelRecord& b) {
                     return a.key() < b.key();
                   });
}

}  // namespace wsloc
