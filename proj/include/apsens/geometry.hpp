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
#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <utility>

namespace apsens {

// Axis-aligned box in continuous pixel coordinates, corner form.
// The y axis points down (image convention). Zero-area boxes are legal,
// negative extents are not.
struct Box {
  double x_l = 0.0;  // left
  double y_l = 0.0;  // top
  double x_r = 0.0;  // right
  double y_r = 0.0;  // bottom

  double width() const { return x_r - x_l; }
  double height() const { return y_r - y_l; }
  double area() const { return width() * height(); }
  bool valid() const { return x_r >= x_l && y_r >= y_l; }

  friend bool operator==(const Box&, const Box&) = default;
};

// The eight compass directions a box can be shifted in.
enum class Direction {
  kLeft,
  kRight,
  kUp,
  kDown,
  kUpLeft,
  kUpRight,
  kDownLeft,
  kDownRight,
};

inline constexpr std::array<Direction, 8> kAllDirections = {
    Direction::kLeft,   Direction::kRight,    Direction::kUp,
    Direction::kDown,   Direction::kUpLeft,   Direction::kUpRight,
    Direction::kDownLeft, Direction::kDownRight,
};

// Unit displacement (dx, dy) for a direction; dx, dy in {-1, 0, +1} and
// never both zero. "up" decreases y.
std::pair<int, int> direction_step(Direction d);

std::string_view direction_name(Direction d);
std::optional<Direction> parse_direction(std::string_view name);

// Intersection over union. Total on valid boxes; 0 when the union is empty.
double iou(const Box& a, const Box& b);

// Intersection over the detection's own area, the overlap measure used for
// crowd ground-truth regions. 0 when the detection has zero area.
double iou_crowd(const Box& det, const Box& crowd);

// Translate by (t * width, t * height), t in [0, 1]. Size preserved.
Box shift_proportional(const Box& b, double t);

// Translate by the direction's unit step times offset (pixels, >= 0).
// Diagonals displace both axes by the full offset. No clipping.
Box shift_direction(const Box& b, Direction d, double offset);

// Move the bottom-right corner outwards by offset on both axes.
Box enlarge(const Box& b, double offset);

// Move the bottom-right corner inwards by offset on both axes; each extent
// clamps independently at zero.
Box shrink(const Box& b, double offset);

}  // namespace apsens
