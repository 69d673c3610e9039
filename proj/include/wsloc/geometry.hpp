// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Axis-aligned box arithmetic shared by every stage of the pipeline. Boxes use
// continuous coordinates: area is (x_max - x_min) * (y_max - y_min), with no
// pixel-inclusive +1 convention.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace wsloc {

inline constexpr int kUnlabeled = -1;

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// Rectangle with a confidence and an integer label. For tool boxes the label
// is a class id from a ClassRegistry; part boxes carry kUnlabeled.
//
// Construction rejects zero-area, inverted or non-finite boxes and
// confidences outside [0, 1] with a GeometryError.
class Box2D {
 public:
  Box2D(double x_min, double y_min, double x_max, double y_max,
        double confidence = 1.0, int label = kUnlabeled);

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }
  double confidence() const { return confidence_; }
  int label() const { return label_; }

  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min_ + x_max_); }
  double center_y() const { return 0.5 * (y_min_ + y_max_); }

  Box2D with_label(int label) const;
  Box2D with_confidence(double confidence) const;
  Box2D translated(double dx, double dy) const;

  bool within(const ImageSize& image) const;

  friend bool operator==(const Box2D&, const Box2D&) = default;

 private:
  double x_min_;
  double y_min_;
  double x_max_;
  double y_max_;
  double confidence_;
  int label_;
};

Box2D box_from_center(double cx, double cy, double width, double height,
                      double confidence = 1.0, int label = kUnlabeled);

double intersection_area(const Box2D& a, const Box2D& b);

// area(a ∩ b) / area(a ∪ b); 0 when disjoint.
double iou(const Box2D& a, const Box2D& b);

// area(a ∩ b) / min(area(a), area(b)); 1 when one box contains the other.
double intersection_over_min(const Box2D& a, const Box2D& b);

enum class OverlapMetric { kIou, kIntersectionOverMin };

double overlap(OverlapMetric metric, const Box2D& a, const Box2D& b);

std::string_view to_string(OverlapMetric metric);
std::optional<OverlapMetric> parse_overlap_metric(std::string_view text);

// (x-center, y-center). Left-to-right order sorts ascending on this key.
std::pair<double, double> ordering_key(const Box2D& box);

// Permutation that visits `boxes` left to right: ascending x-center, then
// ascending y-center, then input index.
std::vector<std::size_t> left_to_right_order(std::span<const Box2D> boxes);

}  // namespace wsloc
