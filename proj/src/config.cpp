// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/config.hpp"

#include <string>

#include "wsloc/error.hpp"

namespace wsloc {

std::string_view to_string(AnchorRule rule) {
  return rule == AnchorRule::kClevisOnly ? "clevis_only"
                                         : "clevis_or_special_tip";
}

std::optional<AnchorRule> parse_anchor_rule(std::string_view text) {
  if (text == "clevis_or_special_tip") return AnchorRule::kClevisOrSpecialTip;
  if (text == "clevis_only") return AnchorRule::kClevisOnly;
  return std::nullopt;
}

std::string_view to_string(MatchMode mode) {
  return mode == MatchMode::kLiteral ? "literal" : "capped";
}

std::optional<MatchMode> parse_match_mode(std::string_view text) {
  if (text == "capped") return MatchMode::kCapped;
  if (text == "literal") return MatchMode::kLiteral;
  return std::nullopt;
}

void BootstrapConfig::validate() const {
  if (!(min_part_confidence >= 0.0 && min_part_confidence <= 1.0)) {
    throw ConfigError("min_part_confidence " +
                      std::to_string(min_part_confidence) +
                      " outside [0, 1]");
  }
  if (required_tool_count < 1) {
    throw ConfigError("required_tool_count must be >= 1");
  }
}

void FilterConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ConfigError("tau " + std::to_string(tau) + " outside (0, 1)");
  }
  if (!(min_tool_confidence >= 0.0 && min_tool_confidence <= 1.0)) {
    throw ConfigError("min_tool_confidence " +
                      std::to_string(min_tool_confidence) +
                      " outside [0, 1]");
  }
}

nlohmann::json to_json(const BootstrapConfig& cfg) {
  return {{"min_part_confidence", cfg.min_part_confidence},
          {"anchor_rule", to_string(cfg.anchor_rule)},
          {"required_tool_count", cfg.required_tool_count}};
}

nlohmann::json to_json(const FilterConfig& cfg) {
  return {{"tau", cfg.tau},
          {"overlap_metric", to_string(cfg.overlap_metric)},
          {"match_mode", to_string(cfg.match_mode)},
          {"min_tool_confidence", cfg.min_tool_confidence}};
}

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key +
                      "' has the wrong type");
  }
}

}  // namespace

BootstrapConfig bootstrap_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("bootstrap config must be an object");
  BootstrapConfig cfg;
  cfg.min_part_confidence =
      get_or(j, "min_part_confidence", cfg.min_part_confidence);
  cfg.required_tool_count =
      get_or(j, "required_tool_count", cfg.required_tool_count);
  const auto rule = get_or<std::string>(j, "anchor_rule",
                                        std::string(to_string(cfg.anchor_rule)));
  auto parsed = parse_anchor_rule(rule);
  if (!parsed) throw ConfigError("unknown anchor_rule '" + rule + "'");
  cfg.anchor_rule = *parsed;
  cfg.validate();
  return cfg;
}

FilterConfig filter_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("filter config must be an object");
  FilterConfig cfg;
  cfg.tau = get_or(j, "tau", cfg.tau);
  cfg.min_tool_confidence =
      get_or(j, "min_tool_confidence", cfg.min_tool_confidence);
  const auto metric = get_or<std::string>(
      j, "overlap_metric", std::string(to_string(cfg.overlap_metric)));
  auto parsed_metric = parse_overlap_metric(metric);
  if (!parsed_metric) throw ConfigError("unknown overlap_metric '" + metric + "'");
  cfg.overlap_metric = *parsed_metric;
  const auto mode = get_or<std::string>(j, "match_mode",
                                        std::string(to_string(cfg.match_mode)));
  auto parsed_mode = parse_match_mode(mode);
  if (!parsed_mode) throw ConfigError("unknown match_mode '" + mode + "'");
  cfg.match_mode = *parsed_mode;
  cfg.validate();
  return cfg;
}

}  // namespace wsloc
