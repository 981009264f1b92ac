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
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "apsens/coco_io.hpp"
#include "apsens/errors.hpp"
#include "apsens/evaluator.hpp"
#include "apsens/report.hpp"
#include "apsens/sweep.hpp"
#include "apsens/synthetic.hpp"

namespace {

using namespace apsens;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt6(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double parse_double(const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw UsageError("invalid number '" + text + "' in --offsets");
  }
  if (pos != text.size()) {
    throw UsageError("invalid number '" + text + "' in --offsets");
  }
  return v;
}

// Offset specs: "a..b" (step 1), "a..b:step", or a comma list "v1,v2,...".
std::vector<double> parse_offsets(const std::string& spec) {
  std::vector<double> out;
  const std::size_t range_pos = spec.find("..");
  if (range_pos != std::string::npos) {
    const std::string lo_text = spec.substr(0, range_pos);
    std::string hi_text = spec.substr(range_pos + 2);
    double step = 1.0;
    if (const std::size_t colon = hi_text.find(':');
        colon != std::string::npos) {
      step = parse_double(hi_text.substr(colon + 1));
      hi_text = hi_text.substr(0, colon);
    }
    const double lo = parse_double(lo_text);
    const double hi = parse_double(hi_text);
    if (!(step > 0.0) || hi < lo) {
      throw UsageError("invalid offset range '" + spec + "'");
    }
    const long long count =
        static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long long i = 0; i < count; ++i) {
      double v = lo + static_cast<double>(i) * step;
      if (std::abs(v - hi) < 1e-9) {
        v = hi;
      }
      out.push_back(v);
    }
  } else {
    std::size_t begin = 0;
    while (begin <= spec.size()) {
      const std::size_t comma = spec.find(',', begin);
      const std::string item =
          spec.substr(begin, comma == std::string::npos ? std::string::npos
                                                        : comma - begin);
      if (item.empty()) {
        throw UsageError("empty item in --offsets list");
      }
      out.push_back(parse_double(item));
      if (comma == std::string::npos) {
        break;
      }
      begin = comma + 1;
    }
  }
  for (double v : out) {
    if (!(v >= 0.0)) {
      throw UsageError("offsets must be >= 0");
    }
  }
  if (out.empty()) {
    throw UsageError("empty --offsets");
  }
  return out;
}

struct InputOpts {
  std::string annotations;
  std::string detections;
  bool gt_as_preds = false;
  int threads = 0;
};

void add_input_opts(CLI::App* cmd, InputOpts* opts, bool detections_allowed) {
  cmd->add_option("--annotations", opts->annotations,
                  "COCO instances annotation file")
      ->required();
  if (detections_allowed) {
    cmd->add_option("--detections", opts->detections,
                    "COCO detection-results file");
    cmd->add_flag("--gt-as-predictions", opts->gt_as_preds,
                  "use ground-truth boxes as score-1.0 predictions");
  }
  cmd->add_option("--threads", opts->threads,
                  "worker threads (0 = hardware default)");
}

std::pair<Dataset, std::vector<Detection>> load_inputs(const InputOpts& opts) {
  if (opts.gt_as_preds == !opts.detections.empty()) {
    throw UsageError(
        "exactly one of --detections PATH or --gt-as-predictions is required");
  }
  std::cerr << "[apsens] loading annotations from " << opts.annotations
            << "\n";
  Dataset ds = load_dataset(opts.annotations);
  std::cerr << "[apsens] " << ds.images.size() << " images, "
            << ds.categories.size() << " categories, "
            << ds.ground_truths.size() << " annotations\n";
  std::vector<Detection> dets;
  if (opts.gt_as_preds) {
    dets = gt_as_detections(ds);
    std::cerr << "[apsens] using " << dets.size()
              << " ground-truth boxes as predictions\n";
  } else {
    std::cerr << "[apsens] loading detections from " << opts.detections
              << "\n";
    dets = load_detections(opts.detections, ds);
    std::cerr << "[apsens] " << dets.size() << " detections\n";
  }
  return {std::move(ds), std::move(dets)};
}

fs::path ensure_out_dir(const std::string& dir) {
  fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) {
    throw IoError("cannot create output directory " + path.string());
  }
  return path;
}

void print_summary(const ApSummary& s) {
  std::cout << "mAP " << fmt6(s.map) << "\n";
  std::cout << "AP50 " << fmt6(s.ap50) << "\n";
  std::cout << "AP75 " << fmt6(s.ap75) << "\n";
  std::cout << "APsmall " << fmt6(s.ap_small) << "\n";
  std::cout << "APmedium " << fmt6(s.ap_medium) << "\n";
  std::cout << "APlarge " << fmt6(s.ap_large) << "\n";
}

int cmd_evaluate(const InputOpts& input, const std::string& out_dir) {
  auto [ds, dets] = load_inputs(input);
  const ApSummary summary = evaluate(ds, dets, EvalParams::coco(),
                                     input.threads);
  print_summary(summary);
  if (!out_dir.empty()) {
    const fs::path dir = ensure_out_dir(out_dir);
    write_summary_csv(summary, dir / "summary.csv");
    std::cerr << "[apsens] wrote " << (dir / "summary.csv").string() << "\n";
  }
  return kExitOk;
}

struct SweepOpts {
  InputOpts input;
  std::string kind = "translate";
  std::string regime = "random";
  std::string direction;
  std::string offsets = "0..10";
  std::uint64_t seed = 1;
  std::string out_dir;
};

void emit_sweep(const SweepResult& result, const fs::path& dir,
                const std::string& stem, const std::string& title) {
  const fs::path csv = dir / (stem + ".csv");
  const fs::path svg = dir / (stem + ".svg");
  write_sweep_csv(result, csv);
  write_svg_chart(sweep_ap_chart(result, title), svg);
  std::cout << csv.string() << "\n" << svg.string() << "\n";
}

int cmd_sweep(const SweepOpts& opts) {
  PerturbKind kind;
  if (opts.kind == "translate") {
    kind = PerturbKind::kTranslate;
  } else if (opts.kind == "enlarge") {
    kind = PerturbKind::kEnlarge;
  } else if (opts.kind == "shrink") {
    kind = PerturbKind::kShrink;
  } else {
    throw UsageError("unknown --kind '" + opts.kind + "'");
  }
  if (kind != PerturbKind::kTranslate &&
      (!opts.direction.empty() || opts.regime != "random")) {
    throw UsageError("--regime/--direction apply to --kind translate only");
  }
  std::optional<Direction> direction;
  if (!opts.direction.empty()) {
    direction = parse_direction(opts.direction);
    if (!direction) {
      throw UsageError("unknown --direction '" + opts.direction + "'");
    }
  }
  if (kind == PerturbKind::kTranslate) {
    if (opts.regime != "random" && opts.regime != "fixed") {
      throw UsageError("--regime must be random or fixed");
    }
    if (opts.regime == "random" && direction) {
      throw UsageError("--direction requires --regime fixed");
    }
  }

  const std::vector<double> offsets = parse_offsets(opts.offsets);
  auto [ds, dets] = load_inputs(opts.input);
  const fs::path dir = ensure_out_dir(opts.out_dir);

  if (kind != PerturbKind::kTranslate) {
    std::cerr << "[apsens] running " << opts.kind << " sweep over "
              << offsets.size() << " offsets\n";
    const SweepResult result = run_scaling_sweep(
        ds, dets, kind, offsets, EvalParams::coco(), opts.input.threads);
    emit_sweep(result, dir, "sweep_" + opts.kind,
               "AP vs box scaling (" + opts.kind + ")");
    return kExitOk;
  }

  if (opts.regime == "random") {
    std::cerr << "[apsens] running random-direction translation sweep over "
              << offsets.size() << " offsets\n";
    const SweepResult result = run_sweep(ds, dets, PerturbKind::kTranslate,
                                         Regime::random(), offsets, opts.seed,
                                         EvalParams::coco(),
                                         opts.input.threads);
    emit_sweep(result, dir, "sweep_translate_random",
               "AP vs box shift (random direction)");
    return kExitOk;
  }

  if (direction) {
    std::cerr << "[apsens] running fixed-direction ("
              << direction_name(*direction) << ") translation sweep over "
              << offsets.size() << " offsets\n";
    const SweepResult result = run_sweep(
        ds, dets, PerturbKind::kTranslate, Regime::fixed(*direction), offsets,
        opts.seed, EvalParams::coco(), opts.input.threads);
    emit_sweep(result, dir,
               "sweep_translate_fixed_" + std::string(direction_name(
                   *direction)),
               "AP vs box shift (" + std::string(direction_name(*direction)) +
                   ")");
    return kExitOk;
  }

  std::cerr << "[apsens] running the full 8-direction matrix over "
            << offsets.size() << " offsets\n";
  for (Direction d : kAllDirections) {
    std::cerr << "[apsens] direction " << direction_name(d) << "\n";
    const SweepResult result =
        run_sweep(ds, dets, PerturbKind::kTranslate, Regime::fixed(d), offsets,
                  opts.seed, EvalParams::coco(), opts.input.threads);
    emit_sweep(result, dir,
               "sweep_translate_fixed_" + std::string(direction_name(d)),
               "AP vs box shift (" + std::string(direction_name(d)) + ")");
  }
  return kExitOk;
}

struct IouStudyOpts {
  int count = 1000;
  std::uint64_t seed = 0;
  std::string offsets = "0..10";
  std::string out_dir;
};

int cmd_iou_study(const IouStudyOpts& opts) {
  RandomBoxConfig cfg;
  cfg.count = opts.count;
  cfg.seed = opts.seed;
  const std::vector<Box> boxes = generate_boxes(cfg);
  std::cerr << "[apsens] generated " << boxes.size() << " boxes\n";

  std::vector<double> proportional_offsets(11);
  for (int i = 0; i <= 10; ++i) {
    proportional_offsets[i] = i / 10.0;
  }
  const std::vector<double> fixed_offsets = parse_offsets(opts.offsets);

  const fs::path dir = ensure_out_dir(opts.out_dir);

  const IouDecayTable prop = iou_decay_proportional(boxes,
                                                    proportional_offsets);
  const fs::path prop_csv = dir / "iou_decay_proportional.csv";
  const fs::path prop_svg = dir / "iou_decay_proportional.svg";
  write_decay_csv(prop, prop_csv);
  write_svg_chart(decay_chart(prop, boxes, "IOU decay, proportional shift",
                              "offset (fraction of box size)"),
                  prop_svg);

  const IouDecayTable fixed = iou_decay_fixed(boxes, fixed_offsets);
  const fs::path fixed_csv = dir / "iou_decay_fixed.csv";
  const fs::path fixed_svg = dir / "iou_decay_fixed.svg";
  write_decay_csv(fixed, fixed_csv);
  write_svg_chart(decay_chart(fixed, boxes, "IOU decay, fixed pixel shift",
                              "offset (pixels)"),
                  fixed_svg);

  std::cout << prop_csv.string() << "\n"
            << prop_svg.string() << "\n"
            << fixed_csv.string() << "\n"
            << fixed_svg.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AP sensitivity toolkit: COCO evaluation under bounding-box "
               "perturbations"};
  app.require_subcommand(1);

  InputOpts eval_input;
  std::string eval_out;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "compute the six COCO AP metrics");
  add_input_opts(eval_cmd, &eval_input, /*detections_allowed=*/true);
  eval_cmd->add_option("--out", eval_out, "directory for summary.csv");

  SweepOpts sweep_opts;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "AP under a perturbation offset sweep");
  add_input_opts(sweep_cmd, &sweep_opts.input, /*detections_allowed=*/true);
  sweep_cmd->add_option("--kind", sweep_opts.kind,
                        "translate | enlarge | shrink");
  sweep_cmd->add_option("--regime", sweep_opts.regime, "random | fixed");
  sweep_cmd->add_option("--direction", sweep_opts.direction,
                        "fixed-regime direction; omit for all eight");
  sweep_cmd->add_option("--offsets", sweep_opts.offsets,
                        "range a..b[:step] or comma list");
  sweep_cmd->add_option("--seed", sweep_opts.seed,
                        "seed for random-direction draws");
  sweep_cmd->add_option("--out", sweep_opts.out_dir, "output directory")
      ->required();

  IouStudyOpts iou_opts;
  CLI::App* iou_cmd = app.add_subcommand(
      "iou-study", "IOU decay of randomly generated boxes under shifting");
  iou_cmd->add_option("--count", iou_opts.count, "number of random boxes");
  iou_cmd->add_option("--seed", iou_opts.seed, "box generator seed");
  iou_cmd->add_option("--offsets", iou_opts.offsets,
                      "pixel offsets for the fixed-shift study");
  iou_cmd->add_option("--out", iou_opts.out_dir, "output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (eval_cmd->parsed()) {
      return cmd_evaluate(eval_input, eval_out);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_opts);
    }
    if (iou_cmd->parsed()) {
      return cmd_iou_study(iou_opts);
    }
    throw InternalError("no subcommand dispatched");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
