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

// Benchmark for the evaluation engine: serial reference vs the OpenMP path
// at several thread counts, on a synthetic dataset. Also asserts that every
// configuration returns a bit-identical summary.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "apsens/coco_io.hpp"
#include "apsens/evaluator.hpp"
#include "apsens/rng.hpp"
#include "apsens/sweep.hpp"

namespace {

using namespace apsens;
using Clock = std::chrono::steady_clock;

struct SyntheticData {
  Dataset ds;
  std::vector<Detection> dets;
};

SyntheticData make_dataset(int images, int categories, int boxes_per_image,
                           std::uint64_t seed) {
  SyntheticData data;
  SplitMix64 rng(seed);
  for (int c = 0; c < categories; ++c) {
    data.ds.categories.push_back({c + 1, "cat" + std::to_string(c + 1)});
  }
  std::int64_t ann_id = 1;
  for (int i = 0; i < images; ++i) {
    const std::int64_t image_id = i + 1;
    data.ds.images.push_back({image_id, 640.0, 480.0});
    for (int b = 0; b < boxes_per_image; ++b) {
      const double w = rng.next_in(4.0, 200.0);
      const double h = rng.next_in(4.0, 200.0);
      const double x = rng.next_in(0.0, 640.0 - 200.0);
      const double y = rng.next_in(0.0, 480.0 - 200.0);
      GroundTruth gt;
      gt.id = ann_id++;
      gt.image_id = image_id;
      gt.category_id = 1 + static_cast<std::int64_t>(rng.next_unit() *
                                                     categories);
      if (gt.category_id > categories) {
        gt.category_id = categories;
      }
      gt.box = Box{x, y, x + w, y + h};
      gt.area = gt.box.area();
      gt.iscrowd = rng.next_unit() < 0.02;
      data.ds.ground_truths.push_back(gt);

      // A jittered true positive ...
      Detection det;
      det.image_id = image_id;
      det.category_id = gt.category_id;
      const double jx = rng.next_in(-2.0, 2.0);
      const double jy = rng.next_in(-2.0, 2.0);
      det.box = Box{x + jx, y + jy, x + w + jx, y + h + jy};
      det.score = rng.next_in(0.3, 1.0);
      det.ordinal = static_cast<std::int64_t>(data.dets.size());
      data.dets.push_back(det);

      // ... and an occasional false positive.
      if (rng.next_unit() < 0.2) {
        Detection fp = det;
        fp.box = Box{x + 150.0, y + 150.0, x + 150.0 + w, y + 150.0 + h};
        fp.score = rng.next_in(0.05, 0.6);
        fp.ordinal = static_cast<std::int64_t>(data.dets.size());
        data.dets.push_back(fp);
      }
    }
  }
  return data;
}

template <typename F>
double time_ms(F&& fn, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    fn();
    const auto stop = Clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(stop - start).count();
    if (ms < best) {
      best = ms;
    }
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int images = 400;
  int categories = 12;
  int boxes_per_image = 24;
  int repeats = 3;
  if (argc > 1) {
    images = std::atoi(argv[1]);
  }
  if (argc > 2) {
    categories = std::atoi(argv[2]);
  }
  if (argc > 3) {
    boxes_per_image = std::atoi(argv[3]);
  }
  if (argc > 4) {
    repeats = std::atoi(argv[4]);
  }

  std::printf("dataset: %d images, %d categories, %d boxes/image\n", images,
              categories, boxes_per_image);
  const SyntheticData data =
      make_dataset(images, categories, boxes_per_image, /*seed=*/7);
  std::printf("         %zu ground truths, %zu detections\n",
              data.ds.ground_truths.size(), data.dets.size());

  const EvalParams params = EvalParams::coco();

  ApSummary ref;
  const double ref_ms = time_ms(
      [&] { ref = evaluate_reference(data.ds, data.dets, params); }, repeats);
  std::printf("%-22s %10.2f ms   (mAP %.6f)\n", "evaluate_reference", ref_ms,
              ref.map);

  int max_threads = 1;
#ifdef _OPENMP
  max_threads = omp_get_max_threads();
#endif
  std::vector<int> thread_counts = {1};
  for (int t = 2; t <= max_threads; t *= 2) {
    thread_counts.push_back(t);
  }
  if (thread_counts.back() != max_threads && max_threads > 1) {
    thread_counts.push_back(max_threads);
  }

  bool all_equal = true;
  for (int threads : thread_counts) {
    ApSummary got;
    const double ms = time_ms(
        [&] { got = evaluate(data.ds, data.dets, params, threads); },
        repeats);
    const bool equal = got == ref;
    all_equal = all_equal && equal;
    std::printf("evaluate (threads=%-3d) %10.2f ms   speedup %5.2fx   %s\n",
                threads, ms, ref_ms / ms,
                equal ? "bit-identical" : "MISMATCH");
  }

  if (!all_equal) {
    std::printf("FAILURE: parallel results differ from the reference\n");
    return 1;
  }
  return 0;
}
