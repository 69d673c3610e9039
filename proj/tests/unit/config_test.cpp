// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/config.hpp"

#include <gtest/gtest.h>

#include "wsloc/error.hpp"

namespace wsloc {
namespace {

TEST(FilterConfigTest, Defaults) {
  const FilterConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.tau, 0.8);
  EXPECT_EQ(cfg.overlap_metric, OverlapMetric::kIou);
  EXPECT_EQ(cfg.match_mode, MatchMode::kCapped);
  EXPECT_DOUBLE_EQ(cfg.min_tool_confidence, 0.25);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(FilterConfigTest, TauMustBeOpenUnitInterval) {
  FilterConfig cfg;
  for (double tau : {0.0, 1.0, -0.2, 1.5}) {
    cfg.tau = tau;
    EXPECT_THROW(cfg.validate(), ConfigError) << tau;
  }
  cfg.tau = 0.8;
  cfg.min_tool_confidence = 1.2;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(BootstrapConfigTest, Validation) {
  BootstrapConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.min_part_confidence = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.min_part_confidence = 0.25;
  cfg.required_tool_count = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ConfigJsonTest, RoundTrip) {
  FilterConfig f;
  f.tau = 0.65;
  f.overlap_metric = OverlapMetric::kIntersectionOverMin;
  f.match_mode = MatchMode::kLiteral;
  f.min_tool_confidence = 0.1;
  EXPECT_EQ(filter_config_from_json(to_json(f)), f);

  BootstrapConfig b;
  b.anchor_rule = AnchorRule::kClevisOnly;
  b.required_tool_count = 2;
  b.min_part_confidence = 0.5;
  EXPECT_EQ(bootstrap_config_from_json(to_json(b)), b);
}

TEST(ConfigJsonTest, MissingKeysKeepDefaultsAndBadValuesThrow) {
  EXPECT_EQ(filter_config_from_json(nlohmann::json::object()), FilterConfig{});
  EXPECT_THROW(filter_config_from_json({{"tau", 2.0}}), ConfigError);
  EXPECT_THROW(filter_config_from_json({{"match_mode", "loose"}}), ConfigError);
  EXPECT_THROW(bootstrap_config_from_json({{"anchor_rule", "tips"}}), ConfigError);
}

TEST(EnumStringsTest, RoundTrip) {
  EXPECT_EQ(parse_match_mode(to_string(MatchMode::kLiteral)), MatchMode::kLiteral);
  EXPECT_EQ(parse_anchor_rule("clevis_only"), AnchorRule::kClevisOnly);
  EXPECT_EQ(to_string(AnchorRule::kClevisOrSpecialTip), "clevis_or_special_tip");
}

}  // namespace
}  // namespace wsloc
