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

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "apsens/geometry.hpp"

namespace apsens {

// Random-box population for the IOU decay study. Defaults span the
// small/medium/large COCO regimes.
struct RandomBoxConfig {
  int count = 1000;
  std::pair<double, double> width_range{4.0, 256.0};
  std::pair<double, double> height_range{4.0, 256.0};
  std::pair<double, double> origin_range{0.0, 1024.0};
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// Deterministic given the seed; every box has positive area within the
// configured ranges.
std::vector<Box> generate_boxes(const RandomBoxConfig& cfg);

// IOU of each box against its own shifted copy, per offset.
struct IouDecayTable {
  std::vector<double> offsets;
  std::vector<std::vector<double>> iou;  // [offset][box]
};

// Diagonal (down-right) shift proportional to box size; offsets are
// fractions in [0, 1]. Every box traces the same curve.
IouDecayTable iou_decay_proportional(std::span<const Box> boxes,
                                     std::span<const double> offsets);

// Diagonal shift by a fixed pixel offset; decay depends on box size.
IouDecayTable iou_decay_fixed(std::span<const Box> boxes,
                              std::span<const double> offsets);

// Closed form for the proportional decay: (1-t)^2 / (2 - (1-t)^2),
// independent of box shape.
double proportional_decay_closed_form(double t);

}  // namespace apsens
