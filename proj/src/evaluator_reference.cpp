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

// Plain serial evaluation kept as the reference for the OpenMP engine in
// evaluator.cpp: straightforward ordered maps and loops, no index packing,
// no scratch reuse. Both paths must return bit-identical summaries; tests
// and the benchmark tool compare them.

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "apsens/errors.hpp"
#include "apsens/evaluator.hpp"

namespace apsens {

ApSummary evaluate_reference(const Dataset& ds,
                             std::span<const Detection> dets,
                             const EvalParams& params) {
  std::set<std::int64_t> image_ids;
  for (const ImageInfo& im : ds.images) {
    image_ids.insert(im.id);
  }
  std::set<std::int64_t> category_ids;
  for (const CategoryInfo& cat : ds.categories) {
    category_ids.insert(cat.id);
  }
  for (const Detection& det : dets) {
    if (!image_ids.contains(det.image_id) ||
        !category_ids.contains(det.category_id)) {
      throw ValidationError(
          "evaluate_reference: detection (ordinal " +
          std::to_string(det.ordinal) +
          ") references unknown image or category id");
    }
  }

  // Buckets keyed by (category id, image id); file order kept inside.
  std::map<std::pair<std::int64_t, std::int64_t>,
           std::pair<std::vector<GroundTruth>, std::vector<Detection>>>
      buckets;
  for (const GroundTruth& gt : ds.ground_truths) {
    buckets[{gt.category_id, gt.image_id}].first.push_back(gt);
  }
  for (const Detection& det : dets) {
    buckets[{det.category_id, det.image_id}].second.push_back(det);
  }

  std::map<std::int64_t, int> category_slot;
  {
    int slot = 0;
    for (std::int64_t id : category_ids) {
      category_slot[id] = slot++;
    }
  }
  std::map<std::int64_t, int> image_slot;
  {
    int slot = 0;
    for (std::int64_t id : image_ids) {
      image_slot[id] = slot++;
    }
  }

  MatchGrid grid;
  grid.category_count = static_cast<int>(category_ids.size());
  grid.area_count = static_cast<int>(params.area_ranges.size());
  for (const auto& [key, bucket] : buckets) {
    grid.cells.push_back({category_slot.at(key.first),
                          image_slot.at(key.second)});
    for (std::size_t a = 0; a < params.area_ranges.size(); ++a) {
      grid.records.push_back(
          match_image_category(bucket.second, bucket.first, params, a));
    }
  }

  grid.category_cell_range.assign(grid.category_count, {0, 0});
  {
    std::size_t pos = 0;
    for (int k = 0; k < grid.category_count; ++k) {
      const std::size_t begin = pos;
      while (pos < grid.cells.size() &&
             grid.cells[pos].category_index == k) {
        ++pos;
      }
      grid.category_cell_range[k] = {static_cast<int>(begin),
                                     static_cast<int>(pos)};
    }
  }

  const AccumTensors tensors = accumulate(grid, params, /*threads=*/1);
  return summarize(tensors, params);
}

}  // namespace apsens
