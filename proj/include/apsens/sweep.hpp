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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "apsens/evaluator.hpp"
#include "apsens/geometry.hpp"

namespace apsens {

enum class PerturbKind { kTranslate, kEnlarge, kShrink };

const char* perturb_kind_name(PerturbKind kind);

// Direction policy for translations: either every box draws its own
// direction from (seed, ordinal), or all boxes move the same way.
struct Regime {
  enum Policy { kRandomDirection, kFixedDirection };
  Policy policy = kRandomDirection;
  Direction direction = Direction::kRight;  // used by kFixedDirection only

  static Regime random() { return {kRandomDirection, Direction::kRight}; }
  static Regime fixed(Direction d) { return {kFixedDirection, d}; }
};

// One perturbation setting. A regime is present exactly when kind is
// translate; validate() enforces that and offset >= 0.
struct PerturbationSpec {
  PerturbKind kind = PerturbKind::kTranslate;
  std::optional<Regime> regime = Regime::random();
  double offset = 0.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws ValidationError
};

// The direction a given detection moves in under a random-direction spec.
// Keyed by (seed, ordinal) only, so it is constant across offsets and
// independent of iteration order.
Direction random_direction_for(std::uint64_t seed, std::int64_t ordinal);

// Apply the spec's transform to every detection box; scores, ids and
// ordinals untouched.
std::vector<Detection> perturb_detections(std::span<const Detection> dets,
                                          const PerturbationSpec& spec);

struct SweepRow {
  PerturbationSpec spec;
  ApSummary summary;
  // 100 * (baseline - value) / baseline per metric, NaN where the baseline
  // is not positive. Order matches ApSummary::kMetricNames.
  std::array<double, 6> relative_drop{};
};

struct SweepResult {
  ApSummary baseline;  // the offset-0 evaluation
  std::vector<SweepRow> rows;  // ascending offset order
};

// Evaluate one perturbation family over a list of offsets (sorted ascending,
// deduplicated). The baseline is the offset-0 evaluation; when 0 appears in
// the offsets its row reuses the baseline evaluation verbatim.
SweepResult run_sweep(const Dataset& ds, std::span<const Detection> dets,
                      PerturbKind kind, const std::optional<Regime>& regime,
                      std::span<const double> offsets, std::uint64_t seed,
                      const EvalParams& params = EvalParams::coco(),
                      int threads = 0);

// One fixed-direction sweep per compass direction, canonical enum order.
std::map<Direction, SweepResult> run_direction_matrix(
    const Dataset& ds, std::span<const Detection> dets,
    std::span<const double> offsets, std::uint64_t seed,
    const EvalParams& params = EvalParams::coco(), int threads = 0);

// Enlarge or shrink sweep (no regime, no randomness).
SweepResult run_scaling_sweep(const Dataset& ds,
                              std::span<const Detection> dets,
                              PerturbKind kind, std::span<const double> offsets,
                              const EvalParams& params = EvalParams::coco(),
                              int threads = 0);

}  // namespace apsens
