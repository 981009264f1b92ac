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
#include "apsens/synthetic.hpp"

#include <stdexcept>

#include "apsens/rng.hpp"

namespace apsens {

void RandomBoxConfig::validate() const {
  if (count <= 0) {
    throw std::invalid_argument("box count must be > 0");
  }
  if (!(width_range.first > 0.0 && width_range.second >= width_range.first)) {
    throw std::invalid_argument("width range must be positive and non-empty");
  }
  if (!(height_range.first > 0.0 &&
        height_range.second >= height_range.first)) {
    throw std::invalid_argument("height range must be positive and non-empty");
  }
  if (!(origin_range.second >= origin_range.first)) {
    throw std::invalid_argument("origin range must be non-empty");
  }
}

std::vector<Box> generate_boxes(const RandomBoxConfig& cfg) {
  cfg.validate();
  std::vector<Box> boxes;
  boxes.reserve(cfg.count);
  for (int i = 0; i < cfg.count; ++i) {
    // Counter-based draws: box i uses stream slots 4i..4i+3, so the list is
    // reproducible regardless of generation order.
    const std::uint64_t base = 4 * static_cast<std::uint64_t>(i);
    const double x = cfg.origin_range.first +
                     bits_to_unit(splitmix64_at(cfg.seed, base)) *
                         (cfg.origin_range.second - cfg.origin_range.first);
    const double y = cfg.origin_range.first +
                     bits_to_unit(splitmix64_at(cfg.seed, base + 1)) *
                         (cfg.origin_range.second - cfg.origin_range.first);
    const double w = cfg.width_range.first +
                     bits_to_unit(splitmix64_at(cfg.seed, base + 2)) *
                         (cfg.width_range.second - cfg.width_range.first);
    const double h = cfg.height_range.first +
                     bits_to_unit(splitmix64_at(cfg.seed, base + 3)) *
                         (cfg.height_range.second - cfg.height_range.first);
    boxes.push_back(Box{x, y, x + w, y + h});
  }
  return boxes;
}

namespace {

IouDecayTable decay_table(std::span<const Box> boxes,
                          std::span<const double> offsets,
                          bool proportional) {
  IouDecayTable table;
  table.offsets.assign(offsets.begin(), offsets.end());
  table.iou.assign(offsets.size(), std::vector<double>(boxes.size(), 0.0));
  for (std::size_t o = 0; o < offsets.size(); ++o) {
    std::vector<double>& row = table.iou[o];
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long b = 0; b < static_cast<long long>(boxes.size()); ++b) {
      const Box& box = boxes[b];
      const Box shifted =
          proportional
              ? shift_proportional(box, offsets[o])
              : shift_direction(box, Direction::kDownRight, offsets[o]);
      row[b] = iou(box, shifted);
    }
  }
  return table;
}

}  // namespace

IouDecayTable iou_decay_proportional(std::span<const Box> boxes,
                                     std::span<const double> offsets) {
  return decay_table(boxes, offsets, /*proportional=*/true);
}

IouDecayTable iou_decay_fixed(std::span<const Box> boxes,
                              std::span<const double> offsets) {
  return decay_table(boxes, offsets, /*proportional=*/false);
}

double proportional_decay_closed_form(double t) {
  const double remaining = (1.0 - t) * (1.0 - t);
  return remaining / (2.0 - remaining);
}

}  // namespace apsens
