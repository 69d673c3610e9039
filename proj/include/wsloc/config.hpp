// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>

#include "json.hpp"
#include "wsloc/geometry.hpp"

namespace wsloc {

enum class AnchorRule { kClevisOrSpecialTip, kClevisOnly };

std::string_view to_string(AnchorRule rule);
std::optional<AnchorRule> parse_anchor_rule(std::string_view text);

struct BootstrapConfig {
  double min_part_confidence = 0.25;
  AnchorRule anchor_rule = AnchorRule::kClevisOrSpecialTip;
  int required_tool_count = 3;

  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const BootstrapConfig&,
                         const BootstrapConfig&) = default;
};

// How many corroborating parts a single tool may contribute to the frame's
// match count. kLiteral counts every part above threshold.
enum class MatchMode { kCapped, kLiteral };

std::string_view to_string(MatchMode mode);
std::optional<MatchMode> parse_match_mode(std::string_view text);

struct FilterConfig {
  double tau = 0.8;
  OverlapMetric overlap_metric = OverlapMetric::kIou;
  MatchMode match_mode = MatchMode::kCapped;
  double min_tool_confidence = 0.25;

  void validate() const;

  friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

nlohmann::json to_json(const BootstrapConfig& cfg);
nlohmann::json to_json(const FilterConfig& cfg);
// Missing keys keep their defaults; the result is validated.
BootstrapConfig bootstrap_config_from_json(const nlohmann::json& j);
FilterConfig filter_config_from_json(const nlohmann::json& j);

}  // namespace wsloc
