// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Records whose 640x480 export is checked in under tests/golden/dataset.

#pragma once

#include <string>
#include <vector>

#include "wsloc/model.hpp"

namespace wsloc::testing {

inline ClassRegistry golden_registry() {
  return ClassRegistry::build({"needle driver", "stapler", "bipolar forceps"});
}

inline std::vector<PseudoLabelRecord> golden_records() {
  auto rec = [](std::string clip, std::int64_t frame, std::vector<Box2D> boxes) {
    return PseudoLabelRecord{std::move(clip), frame, std::move(boxes),
                             Provenance{1, 0.8, OverlapMetric::kIou}};
  };
  return {rec("clip_b", 100, {Box2D(0, 0, 640, 480, 0.5, 2)}),
          rec("clip7", 3,
              {Box2D(0, 0, 320, 240, 1.0, 2), Box2D(100, 50, 200, 150, 0.9, 0)}),
          rec("clip_b", 12,
              {Box2D(639, 479, 640, 480, 1.0, 1),
               Box2D(10.25, 20.5, 30.75, 400.125, 1.0, 1),
               Box2D(1, 2, 3, 4, 1.0, 0)})};
}

inline constexpr const char* kGoldenStems[] = {"clip7_000003", "clip_b_000012",
                                               "clip_b_000100"};

}  // namespace wsloc::testing
