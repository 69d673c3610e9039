// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wsloc/error.hpp"

namespace wsloc {

namespace {

std::string describe(double x_min, double y_min, double x_max, double y_max) {
  return "[" + std::to_string(x_min) + ", " + std::to_string(y_min) + ", " +
         std::to_string(x_max) + ", " + std::to_string(y_max) + "]";
}

}  // namespace

Box2D::Box2D(double x_min, double y_min, double x_max, double y_max,
             double confidence, int label)
    : x_min_(x_min),
      y_min_(y_min),
      x_max_(x_max),
      y_max_(y_max),
      confidence_(confidence),
      label_(label) {
  if (!std::isfinite(x_min) || !std::isfinite(y_min) ||
      !std::isfinite(x_max) || !std::isfinite(y_max)) {
    throw GeometryError("non-finite box coordinates " +
                        describe(x_min, y_min, x_max, y_max));
  }
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw GeometryError("degenerate box " +
                        describe(x_min, y_min, x_max, y_max));
  }
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw GeometryError("confidence " + std::to_string(confidence) +
                        " outside [0, 1]");
  }
}

Box2D Box2D::with_label(int label) const {
  Box2D out = *this;
  out.label_ = label;
  return out;
}

Box2D Box2D::with_confidence(double confidence) const {
  return Box2D(x_min_, y_min_, x_max_, y_max_, confidence, label_);
}

Box2D Box2D::translated(double dx, double dy) const {
  return Box2D(x_min_ + dx, y_min_ + dy, x_max_ + dx, y_max_ + dy,
               confidence_, label_);
}

bool Box2D::within(const ImageSize& image) const {
  return x_min_ >= 0.0 && y_min_ >= 0.0 && x_max_ <= image.width &&
         y_max_ <= image.height;
}

Box2D box_from_center(double cx, double cy, double width, double height,
                      double confidence, int label) {
  return Box2D(cx - 0.5 * width, cy - 0.5 * height, cx + 0.5 * width,
               cy + 0.5 * height, confidence, label);
}

double intersection_area(const Box2D& a, const Box2D& b) {
  const double w =
      std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double h =
      std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const Box2D& a, const Box2D& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double intersection_over_min(const Box2D& a, const Box2D& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  return std::clamp(inter / std::min(a.area(), b.area()), 0.0, 1.0);
}

double overlap(OverlapMetric metric, const Box2D& a, const Box2D& b) {
  switch (metric) {
    case OverlapMetric::kIou:
      return iou(a, b);
    case OverlapMetric::kIntersectionOverMin:
      return intersection_over_min(a, b);
  }
  return 0.0;
}

std::string_view to_string(OverlapMetric metric) {
  return metric == OverlapMetric::kIou ? "iou" : "iomin";
}

std::optional<OverlapMetric> parse_overlap_metric(std::string_view text) {
  if (text == "iou") return OverlapMetric::kIou;
  if (text == "iomin") return OverlapMetric::kIntersectionOverMin;
  return std::nullopt;
}

std::pair<double, double> ordering_key(const Box2D& box) {
  return {box.center_x(), box.center_y()};
}

std::vector<std::size_t> left_to_right_order(std::span<const Box2D> boxes) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return ordering_key(boxes[a]) < ordering_key(boxes[b]);
                   });
  return order;
}

}  // namespace wsloc
