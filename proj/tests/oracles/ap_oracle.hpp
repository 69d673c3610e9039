// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference AP: a flat list of detections and ground truths tagged with a
// frame number, greedy matching by a full scan, and the interpolated
// precision computed from its definition at each of 101 recall levels.

#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "alg1_bruteforce.hpp"

namespace wsloc::oracle {

struct RefDet {
  int frame;
  int cls;
  double conf;
  RawBox box;
};

struct RefGt {
  int frame;
  int cls;
  RawBox box;
};

inline std::optional<double> reference_ap(std::vector<RefDet> dets,
                                          const std::vector<RefGt>& gts,
                                          int cls, double thresh) {
  std::vector<std::size_t> gt_ids;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (gts[i].cls == cls) gt_ids.push_back(i);
  }
  if (gt_ids.empty()) return std::nullopt;
  std::vector<RefDet> mine;
  for (const RefDet& d : dets) {
    if (d.cls == cls) mine.push_back(d);
  }
  std::stable_sort(mine.begin(), mine.end(),
                   [](const RefDet& a, const RefDet& b) { return a.conf > b.conf; });
  std::vector<bool> used(gts.size(), false);
  std::vector<double> prec, rec;
  int tp = 0;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    int best = -1;
    double best_iou = -1;
    for (std::size_t g : gt_ids) {
      if (used[g] || gts[g].frame != mine[i].frame) continue;
      const double v = raw_iou(mine[i].box, gts[g].box);
      if (v >= thresh && v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = true;
      ++tp;
    }
    prec.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    rec.push_back(static_cast<double>(tp) / static_cast<double>(gt_ids.size()));
  }
  double sum = 0;
  for (int r = 0; r <= 100; ++r) {
    double best = 0;
    for (std::size_t i = 0; i < prec.size(); ++i) {
      if (rec[i] >= r / 100.0) best = std::max(best, prec[i]);
    }
    sum += best;
  }
  return sum / 101.0;
}

}  // namespace wsloc::oracle
