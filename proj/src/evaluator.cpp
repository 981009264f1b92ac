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
#include "apsens/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "apsens/errors.hpp"
#include "apsens/geometry.hpp"

namespace apsens {

namespace {

int resolve_threads(int threads) {
#ifdef _OPENMP
  return threads > 0 ? threads : omp_get_max_threads();
#else
  (void)threads;
  return 1;
#endif
}

// Detections ordered by descending score, input ordinal breaking ties.
bool det_score_order(const Detection* a, const Detection* b) {
  if (a->score != b->score) {
    return a->score > b->score;
  }
  return a->ordinal < b->ordinal;
}

// Core greedy matcher for one (image, category) bucket at one area range.
// `dets` must already be score-sorted and truncated; `ious` is indexed
// [d * gts.size() + g] with g in the bucket's original ground-truth order.
MatchRecord match_bucket(std::span<const Detection* const> dets,
                         std::span<const double> det_areas,
                         std::span<const GroundTruth* const> gts,
                         std::span<const double> ious,
                         const EvalParams& params,
                         std::size_t area_range_index) {
  const auto [area_lo, area_hi] = params.area_ranges[area_range_index];
  const int gt_count = static_cast<int>(gts.size());
  const int det_count = static_cast<int>(dets.size());
  const int t_count = static_cast<int>(params.iou_thresholds.size());

  MatchRecord rec;
  rec.det_count = det_count;
  rec.gt_count = gt_count;

  // Partition ground truths: non-ignored first, original order preserved.
  std::vector<std::uint8_t> ignored(gt_count);
  for (int g = 0; g < gt_count; ++g) {
    ignored[g] = gts[g]->iscrowd || gts[g]->area < area_lo ||
                 gts[g]->area > area_hi;
  }
  std::vector<int> gt_order(gt_count);
  std::iota(gt_order.begin(), gt_order.end(), 0);
  std::stable_sort(gt_order.begin(), gt_order.end(),
                   [&ignored](int a, int b) { return ignored[a] < ignored[b]; });

  rec.gt_ignored.resize(gt_count);
  std::vector<std::uint8_t> crowd(gt_count);
  for (int slot = 0; slot < gt_count; ++slot) {
    rec.gt_ignored[slot] = ignored[gt_order[slot]];
    crowd[slot] = gts[gt_order[slot]]->iscrowd;
  }

  rec.det_scores.resize(det_count);
  for (int d = 0; d < det_count; ++d) {
    rec.det_scores[d] = dets[d]->score;
  }
  rec.det_match.assign(static_cast<std::size_t>(t_count) * det_count, -1);
  rec.det_ignored.assign(static_cast<std::size_t>(t_count) * det_count, 0);

  std::vector<std::uint8_t> gt_taken(static_cast<std::size_t>(t_count) *
                                     gt_count);

  for (int t = 0; t < t_count; ++t) {
    const double threshold =
        std::min(params.iou_thresholds[t], 1.0 - 1e-10);
    for (int d = 0; d < det_count; ++d) {
      double best = threshold;
      int match = -1;
      for (int slot = 0; slot < gt_count; ++slot) {
        // A claimed non-crowd ground truth cannot be claimed again.
        if (gt_taken[t * gt_count + slot] && !crowd[slot]) {
          continue;
        }
        // Once a non-ignored candidate is held, ignored ones cannot
        // displace it (ignored entries are all at the tail).
        if (match >= 0 && !rec.gt_ignored[match] && rec.gt_ignored[slot]) {
          break;
        }
        const double v = ious[static_cast<std::size_t>(d) * gt_count +
                              gt_order[slot]];
        if (v < best) {
          continue;
        }
        best = v;
        match = slot;
      }
      if (match < 0) {
        continue;
      }
      rec.det_ignored[t * det_count + d] = rec.gt_ignored[match];
      rec.det_match[t * det_count + d] = match;
      gt_taken[t * gt_count + match] = 1;
    }
    // Unmatched detections whose own box area falls outside the range are
    // ignored rather than counted as false positives.
    for (int d = 0; d < det_count; ++d) {
      if (rec.det_match[t * det_count + d] < 0 &&
          (det_areas[d] < area_lo || det_areas[d] > area_hi)) {
        rec.det_ignored[t * det_count + d] = 1;
      }
    }
  }

  return rec;
}

struct IdIndex {
  std::vector<std::int64_t> image_ids;     // ascending
  std::vector<std::int64_t> category_ids;  // ascending
  std::unordered_map<std::int64_t, int> image_slot;
  std::unordered_map<std::int64_t, int> category_slot;
};

IdIndex build_id_index(const Dataset& ds) {
  IdIndex idx;
  idx.image_ids.reserve(ds.images.size());
  for (const ImageInfo& im : ds.images) {
    idx.image_ids.push_back(im.id);
  }
  std::sort(idx.image_ids.begin(), idx.image_ids.end());
  idx.category_ids.reserve(ds.categories.size());
  for (const CategoryInfo& cat : ds.categories) {
    idx.category_ids.push_back(cat.id);
  }
  std::sort(idx.category_ids.begin(), idx.category_ids.end());
  for (std::size_t i = 0; i < idx.image_ids.size(); ++i) {
    idx.image_slot.emplace(idx.image_ids[i], static_cast<int>(i));
  }
  for (std::size_t i = 0; i < idx.category_ids.size(); ++i) {
    idx.category_slot.emplace(idx.category_ids[i], static_cast<int>(i));
  }
  return idx;
}

// Sorted, truncated detection pointers plus their box areas and the IOU
// matrix against the bucket's ground truths (original order).
struct BucketScratch {
  std::vector<const Detection*> dets;
  std::vector<double> det_areas;
  std::vector<double> ious;
};

void prepare_bucket(std::span<const Detection* const> bucket_dets,
                    std::span<const GroundTruth* const> bucket_gts,
                    const EvalParams& params, BucketScratch& out) {
  out.dets.assign(bucket_dets.begin(), bucket_dets.end());
  std::stable_sort(out.dets.begin(), out.dets.end(), det_score_order);
  if (static_cast<int>(out.dets.size()) > params.max_dets) {
    out.dets.resize(params.max_dets);
  }
  out.det_areas.resize(out.dets.size());
  for (std::size_t d = 0; d < out.dets.size(); ++d) {
    out.det_areas[d] = out.dets[d]->box.width() * out.dets[d]->box.height();
  }
  out.ious.resize(out.dets.size() * bucket_gts.size());
  for (std::size_t d = 0; d < out.dets.size(); ++d) {
    for (std::size_t g = 0; g < bucket_gts.size(); ++g) {
      out.ious[d * bucket_gts.size() + g] =
          bucket_gts[g]->iscrowd
              ? iou_crowd(out.dets[d]->box, bucket_gts[g]->box)
              : iou(out.dets[d]->box, bucket_gts[g]->box);
    }
  }
}

}  // namespace

EvalParams EvalParams::coco() {
  EvalParams p;
  p.iou_thresholds.resize(10);
  for (int i = 0; i < 10; ++i) {
    p.iou_thresholds[i] = (50 + 5 * i) / 100.0;
  }
  p.recall_thresholds.resize(101);
  for (int i = 0; i <= 100; ++i) {
    p.recall_thresholds[i] = i / 100.0;
  }
  p.area_ranges = {{0.0, 1e10}, {0.0, 32.0 * 32.0},
                   {32.0 * 32.0, 96.0 * 96.0}, {96.0 * 96.0, 1e10}};
  p.area_labels = {"all", "small", "medium", "large"};
  p.max_dets = 100;
  return p;
}

MatchRecord match_image_category(std::span<const Detection> dets,
                                 std::span<const GroundTruth> gts,
                                 const EvalParams& params,
                                 std::size_t area_range_index) {
  if (area_range_index >= params.area_ranges.size()) {
    throw ValidationError("match_image_category: area range index out of range");
  }
  std::optional<std::pair<std::int64_t, std::int64_t>> key;
  auto check = [&key](std::int64_t image_id, std::int64_t category_id) {
    if (!key) {
      key = {image_id, category_id};
    } else if (key->first != image_id || key->second != category_id) {
      throw ValidationError(
          "match_image_category: mixed image/category input");
    }
  };
  std::vector<const Detection*> det_ptrs;
  det_ptrs.reserve(dets.size());
  for (const Detection& d : dets) {
    check(d.image_id, d.category_id);
    det_ptrs.push_back(&d);
  }
  std::vector<const GroundTruth*> gt_ptrs;
  gt_ptrs.reserve(gts.size());
  for (const GroundTruth& g : gts) {
    check(g.image_id, g.category_id);
    gt_ptrs.push_back(&g);
  }

  BucketScratch scratch;
  prepare_bucket(det_ptrs, gt_ptrs, params, scratch);
  return match_bucket(scratch.dets, scratch.det_areas, gt_ptrs, scratch.ious,
                      params, area_range_index);
}

MatchGrid build_match_grid(const Dataset& ds, std::span<const Detection> dets,
                           const EvalParams& params, int threads) {
  const IdIndex idx = build_id_index(ds);

  // Bucket ground truths and detections by (category slot, image slot),
  // keeping file order within each bucket.
  struct Keyed {
    std::int64_t sort_key;  // (cat_slot << 32) | img_slot
    const void* ptr;
  };
  auto pack = [](int cat_slot, int img_slot) {
    return (static_cast<std::int64_t>(cat_slot) << 32) | img_slot;
  };

  std::vector<Keyed> gt_keyed;
  gt_keyed.reserve(ds.ground_truths.size());
  for (const GroundTruth& gt : ds.ground_truths) {
    gt_keyed.push_back({pack(idx.category_slot.at(gt.category_id),
                             idx.image_slot.at(gt.image_id)),
                        &gt});
  }
  std::stable_sort(gt_keyed.begin(), gt_keyed.end(),
                   [](const Keyed& a, const Keyed& b) {
                     return a.sort_key < b.sort_key;
                   });

  std::vector<Keyed> det_keyed;
  det_keyed.reserve(dets.size());
  for (const Detection& det : dets) {
    auto cat_it = idx.category_slot.find(det.category_id);
    auto img_it = idx.image_slot.find(det.image_id);
    if (cat_it == idx.category_slot.end() || img_it == idx.image_slot.end()) {
      throw ValidationError(
          "evaluate: detection (ordinal " + std::to_string(det.ordinal) +
          ") references unknown image or category id");
    }
    det_keyed.push_back({pack(cat_it->second, img_it->second), &det});
  }
  std::stable_sort(det_keyed.begin(), det_keyed.end(),
                   [](const Keyed& a, const Keyed& b) {
                     if (a.sort_key != b.sort_key) {
                       return a.sort_key < b.sort_key;
                     }
                     return det_score_order(
                         static_cast<const Detection*>(a.ptr),
                         static_cast<const Detection*>(b.ptr));
                   });

  // Merge-walk both keyed lists into nonempty cells.
  struct CellSpan {
    std::int64_t key;
    std::size_t gt_begin = 0, gt_end = 0;
    std::size_t det_begin = 0, det_end = 0;
  };
  std::vector<CellSpan> spans;
  {
    std::size_t gi = 0, di = 0;
    while (gi < gt_keyed.size() || di < det_keyed.size()) {
      std::int64_t key;
      if (gi < gt_keyed.size() && di < det_keyed.size()) {
        key = std::min(gt_keyed[gi].sort_key, det_keyed[di].sort_key);
      } else if (gi < gt_keyed.size()) {
        key = gt_keyed[gi].sort_key;
      } else {
        key = det_keyed[di].sort_key;
      }
      CellSpan span;
      span.key = key;
      span.gt_begin = gi;
      while (gi < gt_keyed.size() && gt_keyed[gi].sort_key == key) {
        ++gi;
      }
      span.gt_end = gi;
      span.det_begin = di;
      while (di < det_keyed.size() && det_keyed[di].sort_key == key) {
        ++di;
      }
      span.det_end = di;
      spans.push_back(span);
    }
  }

  MatchGrid grid;
  grid.category_count = static_cast<int>(idx.category_ids.size());
  grid.area_count = static_cast<int>(params.area_ranges.size());
  grid.cells.resize(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    grid.cells[i].category_index = static_cast<int>(spans[i].key >> 32);
    grid.cells[i].image_index =
        static_cast<int>(spans[i].key & 0xffffffffLL);
  }
  grid.records.resize(spans.size() * grid.area_count);

  const int num_threads = resolve_threads(threads);
  const long long cell_count = static_cast<long long>(spans.size());
#ifdef _OPENMP
#pragma omp parallel num_threads(num_threads)
#endif
  {
    // Per-thread scratch; pointers into the keyed arrays stay valid.
    BucketScratch scratch;
    std::vector<const Detection*> bucket_dets;
    std::vector<const GroundTruth*> bucket_gts;
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 64)
#endif
    for (long long c = 0; c < cell_count; ++c) {
      const CellSpan& span = spans[c];
      bucket_gts.clear();
      for (std::size_t g = span.gt_begin; g < span.gt_end; ++g) {
        bucket_gts.push_back(
            static_cast<const GroundTruth*>(gt_keyed[g].ptr));
      }
      bucket_dets.clear();
      for (std::size_t d = span.det_begin; d < span.det_end; ++d) {
        bucket_dets.push_back(static_cast<const Detection*>(det_keyed[d].ptr));
      }
      prepare_bucket(bucket_dets, bucket_gts, params, scratch);
      for (int a = 0; a < grid.area_count; ++a) {
        grid.records[c * grid.area_count + a] =
            match_bucket(scratch.dets, scratch.det_areas, bucket_gts,
                         scratch.ious, params, a);
      }
    }
  }

  grid.category_cell_range.assign(grid.category_count, {0, 0});
  std::size_t pos = 0;
  for (int k = 0; k < grid.category_count; ++k) {
    const std::size_t begin = pos;
    while (pos < grid.cells.size() && grid.cells[pos].category_index == k) {
      ++pos;
    }
    grid.category_cell_range[k] = {static_cast<int>(begin),
                                   static_cast<int>(pos)};
  }

  return grid;
}

AccumTensors accumulate(const MatchGrid& grid, const EvalParams& params,
                        int threads) {
  AccumTensors out;
  out.threshold_count = static_cast<int>(params.iou_thresholds.size());
  out.recall_count = static_cast<int>(params.recall_thresholds.size());
  out.category_count = grid.category_count;
  out.area_count = grid.area_count;
  out.precision.assign(static_cast<std::size_t>(out.threshold_count) *
                           out.recall_count * out.category_count *
                           out.area_count,
                       -1.0);

  const int t_count = out.threshold_count;
  const int r_count = out.recall_count;
  const int k_count = out.category_count;
  const int a_count = out.area_count;
  // Matches numpy.spacing(1), the reference precision-denominator epsilon.
  const double eps = std::numeric_limits<double>::epsilon();

  const int num_threads = resolve_threads(threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(num_threads)
#endif
  for (int k = 0; k < k_count; ++k) {
    const auto [cell_begin, cell_end] = grid.category_cell_range[k];
    if (cell_begin == cell_end) {
      continue;  // no images touch this category: sentinel stays
    }
    std::vector<double> scores;
    std::vector<std::uint8_t> matched;  // [t][j]
    std::vector<std::uint8_t> ignored;  // [t][j]
    std::vector<std::size_t> order;
    std::vector<double> recall_curve, precision_curve;

    for (int a = 0; a < a_count; ++a) {
      std::size_t total_dets = 0;
      long long npig = 0;
      for (int c = cell_begin; c < cell_end; ++c) {
        const MatchRecord& rec = grid.records[static_cast<std::size_t>(c) *
                                                  a_count +
                                              a];
        total_dets += rec.det_scores.size();
        for (std::uint8_t ig : rec.gt_ignored) {
          npig += ig == 0;
        }
      }
      if (npig == 0) {
        continue;
      }

      scores.clear();
      scores.reserve(total_dets);
      matched.assign(static_cast<std::size_t>(t_count) * total_dets, 0);
      ignored.assign(static_cast<std::size_t>(t_count) * total_dets, 0);
      std::size_t j = 0;
      for (int c = cell_begin; c < cell_end; ++c) {
        const MatchRecord& rec = grid.records[static_cast<std::size_t>(c) *
                                                  a_count +
                                              a];
        for (int d = 0; d < rec.det_count; ++d, ++j) {
          scores.push_back(rec.det_scores[d]);
          for (int t = 0; t < t_count; ++t) {
            matched[t * total_dets + j] =
                rec.det_match[t * rec.det_count + d] >= 0;
            ignored[t * total_dets + j] =
                rec.det_ignored[t * rec.det_count + d];
          }
        }
      }

      order.resize(total_dets);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&scores](std::size_t x, std::size_t y) {
                         return scores[x] > scores[y];
                       });

      for (int t = 0; t < t_count; ++t) {
        recall_curve.clear();
        precision_curve.clear();
        recall_curve.reserve(total_dets);
        precision_curve.reserve(total_dets);
        long long tp = 0, fp = 0;
        for (std::size_t idx : order) {
          const bool m = matched[t * total_dets + idx];
          const bool ig = ignored[t * total_dets + idx];
          tp += m && !ig;
          fp += !m && !ig;
          recall_curve.push_back(static_cast<double>(tp) /
                                 static_cast<double>(npig));
          precision_curve.push_back(static_cast<double>(tp) /
                                    (static_cast<double>(fp) +
                                     static_cast<double>(tp) + eps));
        }

        // Precision envelope: right-to-left running maximum.
        for (std::size_t i = precision_curve.size(); i-- > 1;) {
          if (precision_curve[i] > precision_curve[i - 1]) {
            precision_curve[i - 1] = precision_curve[i];
          }
        }

        for (int r = 0; r < r_count; ++r) {
          const auto it = std::lower_bound(recall_curve.begin(),
                                           recall_curve.end(),
                                           params.recall_thresholds[r]);
          const std::size_t pi =
              static_cast<std::size_t>(it - recall_curve.begin());
          const double q =
              pi < precision_curve.size() ? precision_curve[pi] : 0.0;
          out.precision[((static_cast<std::size_t>(t) * r_count + r) *
                             k_count +
                         k) *
                            a_count +
                        a] = q;
        }
      }
    }
  }

  return out;
}

namespace {

// Mean of non-sentinel sampled precisions over the selected thresholds and
// one area range; -1 when nothing is in scope.
double mean_precision(const AccumTensors& t, std::span<const int> t_indices,
                      int area_index) {
  double sum = 0.0;
  long long n = 0;
  for (int ti : t_indices) {
    for (int r = 0; r < t.recall_count; ++r) {
      for (int k = 0; k < t.category_count; ++k) {
        const double v = t.at(ti, r, k, area_index);
        if (v > -1.0) {
          sum += v;
          ++n;
        }
      }
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : -1.0;
}

int find_threshold(const EvalParams& params, double value) {
  for (std::size_t i = 0; i < params.iou_thresholds.size(); ++i) {
    if (params.iou_thresholds[i] == value) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

int find_area(const EvalParams& params, std::string_view label) {
  for (std::size_t i = 0; i < params.area_labels.size(); ++i) {
    if (params.area_labels[i] == label) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

}  // namespace

ApSummary summarize(const AccumTensors& tensors, const EvalParams& params) {
  ApSummary s;
  std::vector<int> all_t(tensors.threshold_count);
  std::iota(all_t.begin(), all_t.end(), 0);

  const int a_all = find_area(params, "all");
  if (a_all >= 0) {
    s.map = mean_precision(tensors, all_t, a_all);
    if (const int t50 = find_threshold(params, 0.5); t50 >= 0) {
      const std::array<int, 1> only{t50};
      s.ap50 = mean_precision(tensors, only, a_all);
    }
    if (const int t75 = find_threshold(params, 0.75); t75 >= 0) {
      const std::array<int, 1> only{t75};
      s.ap75 = mean_precision(tensors, only, a_all);
    }
  }
  if (const int a = find_area(params, "small"); a >= 0) {
    s.ap_small = mean_precision(tensors, all_t, a);
  }
  if (const int a = find_area(params, "medium"); a >= 0) {
    s.ap_medium = mean_precision(tensors, all_t, a);
  }
  if (const int a = find_area(params, "large"); a >= 0) {
    s.ap_large = mean_precision(tensors, all_t, a);
  }
  return s;
}

ApSummary evaluate(const Dataset& ds, std::span<const Detection> dets,
                   const EvalParams& params, int threads) {
  const MatchGrid grid = build_match_grid(ds, dets, params, threads);
  const AccumTensors tensors = accumulate(grid, params, threads);
  return summarize(tensors, params);
}

}  // namespace apsens
