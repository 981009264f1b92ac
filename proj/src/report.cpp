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
#include "apsens/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "apsens/errors.hpp"

namespace apsens {

namespace {

std::string fmt6(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmtg(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << content;
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

std::string regime_label(const PerturbationSpec& spec) {
  switch (spec.kind) {
    case PerturbKind::kTranslate:
      return spec.regime && spec.regime->policy == Regime::kFixedDirection
                 ? "fixed"
                 : "random";
    case PerturbKind::kEnlarge:
      return "enlarge";
    case PerturbKind::kShrink:
      return "shrink";
  }
  throw InternalError("unknown perturbation kind");
}

std::string direction_label(const PerturbationSpec& spec) {
  if (spec.kind == PerturbKind::kTranslate && spec.regime &&
      spec.regime->policy == Regime::kFixedDirection) {
    return std::string(direction_name(spec.regime->direction));
  }
  return "-";
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Round tick steps to a 1/2/5 decade sequence.
std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (hi <= lo) {
    return {lo};
  }
  const double raw = (hi - lo) / std::max(target - 1, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  double first = std::ceil(lo / step - 1e-9) * step;
  for (double v = first; v <= hi + step * 1e-9; v += step) {
    ticks.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  }
  return ticks;
}

}  // namespace

void write_sweep_csv(const SweepResult& result,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << "offset,regime,direction,map,ap50,ap75,ap_small,ap_medium,ap_large,"
         "drop_map,drop_ap50,drop_ap75,drop_ap_small,drop_ap_medium,"
         "drop_ap_large\n";
  for (const SweepRow& row : result.rows) {
    out << fmt6(row.spec.offset) << ',' << regime_label(row.spec) << ','
        << direction_label(row.spec);
    for (double v : row.summary.as_array()) {
      out << ',' << fmt6(v);
    }
    for (double v : row.relative_drop) {
      out << ',' << fmt6(v);
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

void write_decay_csv(const IouDecayTable& table,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << "offset,mean,min,max\n";
  for (std::size_t o = 0; o < table.offsets.size(); ++o) {
    const std::vector<double>& row = table.iou[o];
    double mean = 0.0;
    double lo = row.empty() ? 0.0 : row.front();
    double hi = lo;
    for (double v : row) {
      mean += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!row.empty()) {
      mean /= static_cast<double>(row.size());
    }
    out << fmt6(table.offsets[o]) << ',' << fmt6(mean) << ',' << fmt6(lo)
        << ',' << fmt6(hi) << '\n';
  }
  write_text_file(path, out.str());
}

void write_summary_csv(const ApSummary& summary,
                       const std::filesystem::path& path) {
  std::ostringstream out;
  out << "map,ap50,ap75,ap_small,ap_medium,ap_large\n";
  const auto values = summary.as_array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << (i ? "," : "") << fmt6(values[i]);
  }
  out << '\n';
  write_text_file(path, out.str());
}

void write_svg_chart(const ChartSpec& spec,
                     const std::filesystem::path& path) {
  if (spec.series.empty()) {
    throw ValidationError("chart has no series");
  }
  for (const ChartSeries& s : spec.series) {
    if (s.points.empty()) {
      throw ValidationError("chart series '" + s.name + "' is empty");
    }
    for (std::size_t i = 1; i < s.points.size(); ++i) {
      if (!(s.points[i].first > s.points[i - 1].first)) {
        throw ValidationError("chart series '" + s.name +
                              "' x values must be strictly increasing");
      }
    }
  }

  constexpr double kWidth = 800.0, kHeight = 500.0, kMargin = 60.0;
  const double plot_l = kMargin, plot_r = kWidth - kMargin;
  const double plot_t = kMargin, plot_b = kHeight - kMargin;

  double x_lo = spec.series[0].points[0].first, x_hi = x_lo;
  double y_lo = spec.series[0].points[0].second, y_hi = y_lo;
  std::vector<double> distinct_x;
  for (const ChartSeries& s : spec.series) {
    for (const auto& [x, y] : s.points) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
      distinct_x.push_back(x);
    }
  }
  std::sort(distinct_x.begin(), distinct_x.end());
  distinct_x.erase(std::unique(distinct_x.begin(), distinct_x.end()),
                   distinct_x.end());
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi == y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }

  auto map_x = [&](double x) {
    return plot_l + (x - x_lo) / (x_hi - x_lo) * (plot_r - plot_l);
  };
  auto map_y = [&](double y) {
    return plot_b - (y - y_lo) / (y_hi - y_lo) * (plot_b - plot_t);
  };

  // Tick at every data x when there are few; nice decade ticks otherwise.
  const std::vector<double> x_ticks =
      distinct_x.size() <= 12 ? distinct_x : nice_ticks(x_lo, x_hi, 8);
  const std::vector<double> y_ticks = nice_ticks(y_lo, y_hi, 6);

  static constexpr const char* kPalette[] = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
      "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  constexpr std::size_t kPaletteSize = std::size(kPalette);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << kWidth / 2
      << "\" y=\"30\" font-family=\"sans-serif\" font-size=\"18\" "
         "text-anchor=\"middle\">"
      << xml_escape(spec.title) << "</text>\n";

  // Axes.
  svg << "<line x1=\"" << fmt2(plot_l) << "\" y1=\"" << fmt2(plot_b)
      << "\" x2=\"" << fmt2(plot_r) << "\" y2=\"" << fmt2(plot_b)
      << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << fmt2(plot_l) << "\" y1=\"" << fmt2(plot_t)
      << "\" x2=\"" << fmt2(plot_l) << "\" y2=\"" << fmt2(plot_b)
      << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

  for (double t : x_ticks) {
    const double px = map_x(t);
    svg << "<line x1=\"" << fmt2(px) << "\" y1=\"" << fmt2(plot_b)
        << "\" x2=\"" << fmt2(px) << "\" y2=\"" << fmt2(plot_b + 5)
        << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt2(px) << "\" y=\"" << fmt2(plot_b + 20)
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">"
        << fmtg(t) << "</text>\n";
  }
  for (double t : y_ticks) {
    const double py = map_y(t);
    svg << "<line x1=\"" << fmt2(plot_l - 5) << "\" y1=\"" << fmt2(py)
        << "\" x2=\"" << fmt2(plot_l) << "\" y2=\"" << fmt2(py)
        << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt2(plot_l - 8) << "\" y=\"" << fmt2(py + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"end\">"
        << fmtg(t) << "</text>\n";
    // Light gridline to ease reading.
    svg << "<line x1=\"" << fmt2(plot_l) << "\" y1=\"" << fmt2(py)
        << "\" x2=\"" << fmt2(plot_r) << "\" y2=\"" << fmt2(py)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }

  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << fmt2(kHeight - 15)
      << "\" font-family=\"sans-serif\" font-size=\"14\" "
         "text-anchor=\"middle\">"
      << xml_escape(spec.x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kHeight / 2
      << "\" font-family=\"sans-serif\" font-size=\"14\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kHeight / 2 << ")\">"
      << xml_escape(spec.y_label) << "</text>\n";

  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : spec.series[i].points) {
      if (!first) {
        svg << ' ';
      }
      first = false;
      svg << fmt2(map_x(x)) << ',' << fmt2(map_y(y));
    }
    svg << "\"/>\n";
  }

  // Legend, top-right corner of the plot area.
  const double legend_x = plot_r - 170.0;
  double legend_y = plot_t + 12.0;
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    svg << "<line x1=\"" << fmt2(legend_x) << "\" y1=\"" << fmt2(legend_y)
        << "\" x2=\"" << fmt2(legend_x + 24) << "\" y2=\"" << fmt2(legend_y)
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    svg << "<text x=\"" << fmt2(legend_x + 30) << "\" y=\""
        << fmt2(legend_y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(spec.series[i].name) << "</text>\n";
    legend_y += 16.0;
  }

  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

ChartSpec sweep_ap_chart(const SweepResult& result, std::string title) {
  ChartSpec spec;
  spec.title = std::move(title);
  spec.x_label = "offset (pixels)";
  spec.y_label = "average precision";
  ChartSeries map_s{"mAP", {}}, ap50_s{"AP50", {}}, ap75_s{"AP75", {}};
  for (const SweepRow& row : result.rows) {
    map_s.points.emplace_back(row.spec.offset, row.summary.map);
    ap50_s.points.emplace_back(row.spec.offset, row.summary.ap50);
    ap75_s.points.emplace_back(row.spec.offset, row.summary.ap75);
  }
  spec.series = {std::move(map_s), std::move(ap50_s), std::move(ap75_s)};
  return spec;
}

ChartSpec sweep_size_chart(const SweepResult& result, std::string title) {
  ChartSpec spec;
  spec.title = std::move(title);
  spec.x_label = "offset (pixels)";
  spec.y_label = "average precision";
  ChartSeries s{"APsmall", {}}, m{"APmedium", {}}, l{"APlarge", {}};
  for (const SweepRow& row : result.rows) {
    s.points.emplace_back(row.spec.offset, row.summary.ap_small);
    m.points.emplace_back(row.spec.offset, row.summary.ap_medium);
    l.points.emplace_back(row.spec.offset, row.summary.ap_large);
  }
  spec.series = {std::move(s), std::move(m), std::move(l)};
  return spec;
}

ChartSpec decay_chart(const IouDecayTable& table, std::span<const Box> boxes,
                      std::string title, std::string x_label,
                      int max_series) {
  ChartSpec spec;
  spec.title = std::move(title);
  spec.x_label = std::move(x_label);
  spec.y_label = "IOU";

  // Representative boxes spread over the area distribution.
  std::vector<std::size_t> by_area(boxes.size());
  std::iota(by_area.begin(), by_area.end(), std::size_t{0});
  std::stable_sort(by_area.begin(), by_area.end(),
                   [&boxes](std::size_t a, std::size_t b) {
                     return boxes[a].area() < boxes[b].area();
                   });
  std::vector<std::size_t> picks;
  const std::size_t want =
      std::min<std::size_t>(std::max(max_series, 1), boxes.size());
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t pos =
        want == 1 ? 0 : i * (by_area.size() - 1) / (want - 1);
    picks.push_back(by_area[pos]);
  }
  std::sort(picks.begin(), picks.end());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());

  for (std::size_t b : picks) {
    ChartSeries series;
    char name[64];
    std::snprintf(name, sizeof name, "%.0fx%.0f px", boxes[b].width(),
                  boxes[b].height());
    series.name = name;
    for (std::size_t o = 0; o < table.offsets.size(); ++o) {
      series.points.emplace_back(table.offsets[o], table.iou[o][b]);
    }
    spec.series.push_back(std::move(series));
  }
  return spec;
}

}  // namespace apsens
