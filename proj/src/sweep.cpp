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
#include "apsens/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "apsens/errors.hpp"
#include "apsens/rng.hpp"

namespace apsens {

const char* perturb_kind_name(PerturbKind kind) {
  switch (kind) {
    case PerturbKind::kTranslate:
      return "translate";
    case PerturbKind::kEnlarge:
      return "enlarge";
    case PerturbKind::kShrink:
      return "shrink";
  }
  throw InternalError("unknown perturbation kind");
}

void PerturbationSpec::validate() const {
  if (!(offset >= 0.0)) {
    throw ValidationError("perturbation offset must be >= 0");
  }
  if (kind == PerturbKind::kTranslate) {
    if (!regime) {
      throw ValidationError("translation requires a direction regime");
    }
  } else if (regime) {
    throw ValidationError("scaling perturbations take no direction regime");
  }
}

Direction random_direction_for(std::uint64_t seed, std::int64_t ordinal) {
  // 2^64 is a multiple of 8, so the modulo draw is exactly uniform.
  return kAllDirections[splitmix64_at(seed,
                                      static_cast<std::uint64_t>(ordinal)) %
                        kAllDirections.size()];
}

std::vector<Detection> perturb_detections(std::span<const Detection> dets,
                                          const PerturbationSpec& spec) {
  spec.validate();
  std::vector<Detection> out(dets.begin(), dets.end());
  for (Detection& det : out) {
    switch (spec.kind) {
      case PerturbKind::kTranslate: {
        const Direction d =
            spec.regime->policy == Regime::kFixedDirection
                ? spec.regime->direction
                : random_direction_for(spec.seed, det.ordinal);
        det.box = shift_direction(det.box, d, spec.offset);
        break;
      }
      case PerturbKind::kEnlarge:
        det.box = enlarge(det.box, spec.offset);
        break;
      case PerturbKind::kShrink:
        det.box = shrink(det.box, spec.offset);
        break;
    }
  }
  return out;
}

namespace {

std::array<double, 6> relative_drops(const ApSummary& baseline,
                                     const ApSummary& current) {
  const std::array<double, 6> base = baseline.as_array();
  const std::array<double, 6> cur = current.as_array();
  std::array<double, 6> drops{};
  for (std::size_t i = 0; i < drops.size(); ++i) {
    drops[i] = base[i] > 0.0
                   ? 100.0 * (base[i] - cur[i]) / base[i]
                   : std::numeric_limits<double>::quiet_NaN();
  }
  return drops;
}

std::vector<double> canonical_offsets(std::span<const double> offsets) {
  std::vector<double> sorted(offsets.begin(), offsets.end());
  for (double v : sorted) {
    if (!(v >= 0.0)) {
      throw ValidationError("sweep offsets must be >= 0");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return sorted;
}

}  // namespace

SweepResult run_sweep(const Dataset& ds, std::span<const Detection> dets,
                      PerturbKind kind, const std::optional<Regime>& regime,
                      std::span<const double> offsets, std::uint64_t seed,
                      const EvalParams& params, int threads) {
  PerturbationSpec proto{kind, regime, 0.0, seed};
  proto.validate();
  const std::vector<double> sorted = canonical_offsets(offsets);

  SweepResult result;
  // The baseline is the unperturbed evaluation; an offset-0 spec is an
  // identity transform for every kind, so the offset-0 row reuses it.
  result.baseline = evaluate(ds, dets, params, threads);

  result.rows.reserve(sorted.size());
  for (double offset : sorted) {
    SweepRow row;
    row.spec = proto;
    row.spec.offset = offset;
    if (offset == 0.0) {
      row.summary = result.baseline;
    } else {
      const std::vector<Detection> perturbed =
          perturb_detections(dets, row.spec);
      row.summary = evaluate(ds, perturbed, params, threads);
    }
    row.relative_drop = relative_drops(result.baseline, row.summary);
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::map<Direction, SweepResult> run_direction_matrix(
    const Dataset& ds, std::span<const Detection> dets,
    std::span<const double> offsets, std::uint64_t seed,
    const EvalParams& params, int threads) {
  std::map<Direction, SweepResult> out;
  for (Direction d : kAllDirections) {
    out.emplace(d, run_sweep(ds, dets, PerturbKind::kTranslate,
                             Regime::fixed(d), offsets, seed, params,
                             threads));
  }
  return out;
}

SweepResult run_scaling_sweep(const Dataset& ds,
                              std::span<const Detection> dets,
                              PerturbKind kind,
                              std::span<const double> offsets,
                              const EvalParams& params, int threads) {
  if (kind == PerturbKind::kTranslate) {
    throw ValidationError("run_scaling_sweep expects enlarge or shrink");
  }
  return run_sweep(ds, dets, kind, std::nullopt, offsets, /*seed=*/0, params,
                   threads);
}

}  // namespace apsens
