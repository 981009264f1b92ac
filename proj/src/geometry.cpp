/* Copyright 2026 The Apsens Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "apsens/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace apsens {

std::pair<int, int> direction_step(Direction d) {
  switch (d) {
    case Direction::kLeft:
      return {-1, 0};
    case Direction::kRight:
      return {+1, 0};
    case Direction::kUp:
      return {0, -1};
    case Direction::kDown:
      return {0, +1};
    case Direction::kUpLeft:
      return {-1, -1};
    case Direction::kUpRight:
      return {+1, -1};
    case Direction::kDownLeft:
      return {-1, +1};
    case Direction::kDownRight:
      return {+1, +1};
  }
  throw std::invalid_argument("unknown direction");
}

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::kLeft:
      return "left";
    case Direction::kRight:
      return "right";
    case Direction::kUp:
      return "up";
    case Direction::kDown:
      return "down";
    case Direction::kUpLeft:
      return "up-left";
    case Direction::kUpRight:
      return "up-right";
    case Direction::kDownLeft:
      return "down-left";
    case Direction::kDownRight:
      return "down-right";
  }
  throw std::invalid_argument("unknown direction");
}

std::optional<Direction> parse_direction(std::string_view name) {
  for (Direction d : kAllDirections) {
    if (direction_name(d) == name) {
      return d;
    }
  }
  return std::nullopt;
}

double iou(const Box& a, const Box& b) {
  const double w = std::min(a.x_r, b.x_r) - std::max(a.x_l, b.x_l);
  if (w <= 0.0) {
    return 0.0;
  }
  const double h = std::min(a.y_r, b.y_r) - std::max(a.y_l, b.y_l);
  if (h <= 0.0) {
    return 0.0;
  }
  const double inter = w * h;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return inter / uni;
}

double iou_crowd(const Box& det, const Box& crowd) {
  const double w = std::min(det.x_r, crowd.x_r) - std::max(det.x_l, crowd.x_l);
  if (w <= 0.0) {
    return 0.0;
  }
  const double h = std::min(det.y_r, crowd.y_r) - std::max(det.y_l, crowd.y_l);
  if (h <= 0.0) {
    return 0.0;
  }
  const double da = det.area();
  if (da <= 0.0) {
    return 0.0;
  }
  return (w * h) / da;
}

Box shift_proportional(const Box& b, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("shift_proportional: t must be in [0, 1]");
  }
  const double dx = t * b.width();
  const double dy = t * b.height();
  return {b.x_l + dx, b.y_l + dy, b.x_r + dx, b.y_r + dy};
}

Box shift_direction(const Box& b, Direction d, double offset) {
  if (!(offset >= 0.0)) {
    throw std::invalid_argument("shift_direction: offset must be >= 0");
  }
  const auto [sx, sy] = direction_step(d);
  const double dx = sx * offset;
  const double dy = sy * offset;
  return {b.x_l + dx, b.y_l + dy, b.x_r + dx, b.y_r + dy};
}

Box enlarge(const Box& b, double offset) {
  if (!(offset >= 0.0)) {
    throw std::invalid_argument("enlarge: offset must be >= 0");
  }
  return {b.x_l, b.y_l, b.x_r + offset, b.y_r + offset};
}

Box shrink(const Box& b, double offset) {
  if (!(offset >= 0.0)) {
    throw std::invalid_argument("shrink: offset must be >= 0");
  }
  return {b.x_l, b.y_l, std::max(b.x_r - offset, b.x_l),
          std::max(b.y_r - offset, b.y_l)};
}

}  // namespace apsens
