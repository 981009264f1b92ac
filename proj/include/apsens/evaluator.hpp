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
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apsens/coco_io.hpp"

namespace apsens {

// Evaluation protocol parameters. The defaults in coco() reproduce the
// standard COCO detection protocol: 10 IOU thresholds 0.50:0.05:0.95,
// 101 recall levels 0.00:0.01:1.00, area ranges all/small/medium/large,
// and at most 100 detections per image and category.
struct EvalParams {
  std::vector<double> iou_thresholds;
  std::vector<double> recall_thresholds;
  std::vector<std::pair<double, double>> area_ranges;
  std::vector<std::string> area_labels;
  int max_dets = 100;

  static EvalParams coco();
};

// The six headline metrics. -1 marks scopes with no ground truth.
struct ApSummary {
  double map = -1.0;
  double ap50 = -1.0;
  double ap75 = -1.0;
  double ap_small = -1.0;
  double ap_medium = -1.0;
  double ap_large = -1.0;

  std::array<double, 6> as_array() const {
    return {map, ap50, ap75, ap_small, ap_medium, ap_large};
  }
  static constexpr std::array<const char*, 6> kMetricNames = {
      "map", "ap50", "ap75", "ap_small", "ap_medium", "ap_large"};

  friend bool operator==(const ApSummary&, const ApSummary&) = default;
};

// Matching outcome for one (image, category, area range) scope.
// Detections are sorted by descending score (stable, so input ordinals break
// ties) and truncated to max_dets; det arrays are indexed [t * det_count + d].
// Ground truths are in ignore-partitioned order (non-ignored first, original
// order preserved within each group).
struct MatchRecord {
  int det_count = 0;
  int gt_count = 0;
  std::vector<double> det_scores;          // [det_count], sorted desc
  std::vector<std::int32_t> det_match;     // [T * det_count], gt slot or -1
  std::vector<std::uint8_t> det_ignored;   // [T * det_count]
  std::vector<std::uint8_t> gt_ignored;    // [gt_count]
};

// All MatchRecords of one evaluation. Records are laid out per nonempty
// (category, image) cell times area range, cells ordered by (category index,
// image index) with both indices following ascending id order.
struct MatchGrid {
  struct Cell {
    int category_index = 0;
    int image_index = 0;
  };
  int category_count = 0;
  int area_count = 0;
  std::vector<Cell> cells;
  std::vector<MatchRecord> records;  // cells.size() * area_count, [cell][area]
  std::vector<std::pair<int, int>> category_cell_range;  // per category
};

// Precision sampled at every (iou threshold, recall level, category,
// area range); -1 marks scopes with no ground truth.
struct AccumTensors {
  int threshold_count = 0;
  int recall_count = 0;
  int category_count = 0;
  int area_count = 0;
  std::vector<double> precision;  // [t][r][k][a]

  double at(int t, int r, int k, int a) const {
    return precision[((static_cast<std::size_t>(t) * recall_count + r) *
                          category_count +
                      k) *
                         area_count +
                     a];
  }
};

// Greedy reference matching for one image and category at one area range.
// All detections and ground truths must share a single (image, category)
// pair; mixed input is a contract violation (ValidationError).
MatchRecord match_image_category(std::span<const Detection> dets,
                                 std::span<const GroundTruth> gts,
                                 const EvalParams& params,
                                 std::size_t area_range_index);

// Reference accumulation: per (threshold, category, area range) the kept
// detections are merged across images, sorted by score, and the
// monotonically non-increasing precision envelope is sampled at the recall
// thresholds. threads <= 0 means hardware default.
AccumTensors accumulate(const MatchGrid& grid, const EvalParams& params,
                        int threads = 1);

// Collapse sampled precisions into the six headline metrics, skipping -1
// sentinel entries.
ApSummary summarize(const AccumTensors& tensors, const EvalParams& params);

// Full protocol, OpenMP-parallel over (image, category) cells and over
// categories during accumulation. Deterministic: the result is bit-identical
// for every thread count. threads <= 0 uses the hardware default.
ApSummary evaluate(const Dataset& ds, std::span<const Detection> dets,
                   const EvalParams& params = EvalParams::coco(),
                   int threads = 0);

// Plain serial implementation kept as the reference for the parallel path;
// same contract, same bit-exact results, no concurrency anywhere.
ApSummary evaluate_reference(const Dataset& ds, std::span<const Detection> dets,
                             const EvalParams& params = EvalParams::coco());

// The parallel engine split in two for callers that need the intermediate
// tensors (tests, sweep diagnostics).
MatchGrid build_match_grid(const Dataset& ds, std::span<const Detection> dets,
                           const EvalParams& params, int threads = 0);

}  // namespace apsens
