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
#include <filesystem>
#include <string>
#include <vector>

#include "apsens/geometry.hpp"

namespace apsens {

struct ImageInfo {
  std::int64_t id = 0;
  double width = 0.0;   // pixels
  double height = 0.0;  // pixels
};

struct CategoryInfo {
  std::int64_t id = 0;
  std::string name;
};

// One annotated object. `area` is the annotation's own area field
// (segmentation area in COCO), deliberately not recomputed from the box:
// size bucketing of ground truth depends on it.
struct GroundTruth {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Box box;
  double area = 0.0;
  bool iscrowd = false;
};

// One scored prediction. `ordinal` is the stable input position; score ties
// resolve by it, which matters when every score is 1.0.
struct Detection {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Box box;
  double score = 0.0;
  std::int64_t ordinal = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct Dataset {
  std::vector<ImageInfo> images;
  std::vector<CategoryInfo> categories;
  std::vector<GroundTruth> ground_truths;
};

// Parse a COCO instances document (top-level images/annotations/categories,
// bbox as [x, y, w, h] absolute pixels). bbox is converted to corner form;
// `area` is taken verbatim; missing iscrowd defaults to false.
// Throws ParseError on malformed documents (naming the offending record),
// ValidationError on bad data (negative extents, duplicate or dangling ids),
// IoError when the file cannot be read.
Dataset load_dataset(const std::filesystem::path& path);

// Parse a COCO detection-results array ({image_id, category_id, bbox, score}).
// Entries referencing unknown image or category ids are rejected with a
// ValidationError listing the offending entries. Ordinals follow file order.
std::vector<Detection> load_detections(const std::filesystem::path& path,
                                       const Dataset& ds);

// Ground-truth boxes as predictions with score exactly 1.0 (crowd
// annotations included). Ordinals follow ascending annotation id.
std::vector<Detection> gt_as_detections(const Dataset& ds);

// Write a standard results array, corner form converted back to [x, y, w, h].
void write_detections(const std::vector<Detection>& dets,
                      const std::filesystem::path& path);

}  // namespace apsens
