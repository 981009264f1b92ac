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

#include <filesystem>
#include <string>
#include <vector>

#include "apsens/evaluator.hpp"
#include "apsens/sweep.hpp"
#include "apsens/synthetic.hpp"

namespace apsens {

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // x strictly increasing
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;
};

// Sweep CSV: header then one row per offset with columns
// offset, regime, direction, the six metrics, and the six drop_* columns.
// Numeric cells use 6 decimal places; undefined drops are written as nan.
// Byte output is deterministic for identical input.
void write_sweep_csv(const SweepResult& result,
                     const std::filesystem::path& path);

// Decay CSV: offset plus mean/min/max IOU across boxes.
void write_decay_csv(const IouDecayTable& table,
                     const std::filesystem::path& path);

// Single-row CSV with the six headline metrics.
void write_summary_csv(const ApSummary& summary,
                       const std::filesystem::path& path);

// Standalone SVG 1.1 line chart: axes, tick labels, legend, one polyline per
// series, no external resources. Fixed 800x500 canvas with 60-unit margins.
// Throws ValidationError on an empty series set, an empty series, or a
// series whose x values are not strictly increasing.
void write_svg_chart(const ChartSpec& spec, const std::filesystem::path& path);

// Chart builders mirroring the published figures.
ChartSpec sweep_ap_chart(const SweepResult& result, std::string title);
ChartSpec sweep_size_chart(const SweepResult& result, std::string title);
// Decay chart with up to max_series per-box curves picked by area quantile.
ChartSpec decay_chart(const IouDecayTable& table, std::span<const Box> boxes,
                      std::string title, std::string x_label,
                      int max_series = 8);

}  // namespace apsens
