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
#include "apsens/coco_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "apsens/errors.hpp"

namespace apsens {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path, bool strip_heavy_fields) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  try {
    if (strip_heavy_fields) {
      // Annotation files carry segmentation polygons / RLE counts that can
      // dwarf everything else; drop them at parse time.
      json::parser_callback_t cb = [](int /*depth*/, json::parse_event_t event,
                                      json& parsed) {
        if (event == json::parse_event_t::key &&
            (parsed == json("segmentation") || parsed == json("keypoints"))) {
          return false;
        }
        return true;
      };
      return json::parse(in, cb);
    }
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

double require_number(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ParseError(where + ": missing or non-numeric '" + key + "'");
  }
  return it->get<double>();
}

std::int64_t require_int(const json& j, const char* key,
                         const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    throw ParseError(where + ": missing or non-integer '" + key + "'");
  }
  return it->get<std::int64_t>();
}

// COCO bbox [x, y, w, h] -> corner form, validating extents.
Box parse_bbox(const json& j, const std::string& where) {
  auto it = j.find("bbox");
  if (it == j.end() || !it->is_array() || it->size() != 4 ||
      !std::all_of(it->begin(), it->end(),
                   [](const json& v) { return v.is_number(); })) {
    throw ParseError(where + ": 'bbox' must be an array of 4 numbers");
  }
  const double x = (*it)[0].get<double>();
  const double y = (*it)[1].get<double>();
  const double w = (*it)[2].get<double>();
  const double h = (*it)[3].get<double>();
  if (w < 0.0 || h < 0.0) {
    throw ValidationError(where + ": bbox has negative width or height");
  }
  return Box{x, y, x + w, y + h};
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  const json doc = parse_file(path, /*strip_heavy_fields=*/true);
  if (!doc.is_object()) {
    throw ParseError(path.string() + ": top level is not an object");
  }
  for (const char* key : {"images", "annotations", "categories"}) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw ParseError(path.string() + ": missing top-level array '" +
                       std::string(key) + "'");
    }
  }

  Dataset ds;
  std::unordered_set<std::int64_t> image_ids;
  std::unordered_set<std::int64_t> category_ids;

  ds.images.reserve(doc["images"].size());
  for (std::size_t i = 0; i < doc["images"].size(); ++i) {
    const json& im = doc["images"][i];
    const std::string where = "images[" + std::to_string(i) + "]";
    if (!im.is_object()) {
      throw ParseError(where + ": not an object");
    }
    ImageInfo info;
    info.id = require_int(im, "id", where);
    info.width = require_number(im, "width", where);
    info.height = require_number(im, "height", where);
    if (!image_ids.insert(info.id).second) {
      throw ValidationError(where + ": duplicate image id " +
                            std::to_string(info.id));
    }
    ds.images.push_back(info);
  }

  ds.categories.reserve(doc["categories"].size());
  for (std::size_t i = 0; i < doc["categories"].size(); ++i) {
    const json& cat = doc["categories"][i];
    const std::string where = "categories[" + std::to_string(i) + "]";
    if (!cat.is_object()) {
      throw ParseError(where + ": not an object");
    }
    CategoryInfo info;
    info.id = require_int(cat, "id", where);
    if (auto it = cat.find("name"); it != cat.end() && it->is_string()) {
      info.name = it->get<std::string>();
    }
    if (!category_ids.insert(info.id).second) {
      throw ValidationError(where + ": duplicate category id " +
                            std::to_string(info.id));
    }
    ds.categories.push_back(std::move(info));
  }

  ds.ground_truths.reserve(doc["annotations"].size());
  for (std::size_t i = 0; i < doc["annotations"].size(); ++i) {
    const json& ann = doc["annotations"][i];
    const std::string where = "annotations[" + std::to_string(i) + "]";
    if (!ann.is_object()) {
      throw ParseError(where + ": not an object");
    }
    GroundTruth gt;
    gt.id = require_int(ann, "id", where);
    const std::string tagged = where + " (id " + std::to_string(gt.id) + ")";
    gt.image_id = require_int(ann, "image_id", where);
    gt.category_id = require_int(ann, "category_id", where);
    gt.box = parse_bbox(ann, tagged);
    gt.area = require_number(ann, "area", tagged);
    if (gt.area < 0.0) {
      throw ValidationError(tagged + ": negative area");
    }
    if (auto it = ann.find("iscrowd"); it != ann.end()) {
      if (it->is_boolean()) {
        gt.iscrowd = it->get<bool>();
      } else if (it->is_number_integer()) {
        gt.iscrowd = it->get<std::int64_t>() != 0;
      } else {
        throw ParseError(tagged + ": 'iscrowd' must be 0/1 or boolean");
      }
    }
    if (!image_ids.contains(gt.image_id)) {
      throw ValidationError(tagged + ": unknown image id " +
                            std::to_string(gt.image_id));
    }
    if (!category_ids.contains(gt.category_id)) {
      throw ValidationError(tagged + ": unknown category id " +
                            std::to_string(gt.category_id));
    }
    ds.ground_truths.push_back(gt);
  }

  return ds;
}

std::vector<Detection> load_detections(const std::filesystem::path& path,
                                       const Dataset& ds) {
  const json doc = parse_file(path, /*strip_heavy_fields=*/false);
  if (!doc.is_array()) {
    throw ParseError(path.string() + ": results document must be an array");
  }

  std::unordered_set<std::int64_t> image_ids;
  for (const ImageInfo& im : ds.images) {
    image_ids.insert(im.id);
  }
  std::unordered_set<std::int64_t> category_ids;
  for (const CategoryInfo& cat : ds.categories) {
    category_ids.insert(cat.id);
  }

  std::vector<Detection> dets;
  dets.reserve(doc.size());
  std::vector<std::string> unknown;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& entry = doc[i];
    const std::string where = "results[" + std::to_string(i) + "]";
    if (!entry.is_object()) {
      throw ParseError(where + ": not an object");
    }
    Detection det;
    det.image_id = require_int(entry, "image_id", where);
    det.category_id = require_int(entry, "category_id", where);
    det.box = parse_bbox(entry, where);
    det.score = require_number(entry, "score", where);
    if (det.score < 0.0 || det.score > 1.0) {
      throw ValidationError(where + ": score " + std::to_string(det.score) +
                            " outside [0, 1]");
    }
    det.ordinal = static_cast<std::int64_t>(i);
    if (!image_ids.contains(det.image_id)) {
      unknown.push_back(where + " image_id " + std::to_string(det.image_id));
    } else if (!category_ids.contains(det.category_id)) {
      unknown.push_back(where + " category_id " +
                        std::to_string(det.category_id));
    }
    dets.push_back(det);
  }

  if (!unknown.empty()) {
    std::ostringstream msg;
    msg << path.string() << ": " << unknown.size()
        << " entries reference unknown ids:";
    const std::size_t shown = std::min<std::size_t>(unknown.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) {
      msg << "\n  " << unknown[i];
    }
    if (shown < unknown.size()) {
      msg << "\n  ... (" << unknown.size() - shown << " more)";
    }
    throw ValidationError(msg.str());
  }

  return dets;
}

std::vector<Detection> gt_as_detections(const Dataset& ds) {
  std::vector<const GroundTruth*> order;
  order.reserve(ds.ground_truths.size());
  for (const GroundTruth& gt : ds.ground_truths) {
    order.push_back(&gt);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const GroundTruth* a, const GroundTruth* b) {
                     return a->id < b->id;
                   });

  std::vector<Detection> dets;
  dets.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    Detection det;
    det.image_id = order[i]->image_id;
    det.category_id = order[i]->category_id;
    det.box = order[i]->box;
    det.score = 1.0;
    det.ordinal = static_cast<std::int64_t>(i);
    dets.push_back(det);
  }
  return dets;
}

void write_detections(const std::vector<Detection>& dets,
                      const std::filesystem::path& path) {
  json arr = json::array();
  for (const Detection& det : dets) {
    json entry;
    entry["image_id"] = det.image_id;
    entry["category_id"] = det.category_id;
    entry["bbox"] = {det.box.x_l, det.box.y_l, det.box.width(),
                     det.box.height()};
    entry["score"] = det.score;
    arr.push_back(std::move(entry));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << arr.dump() << '\n';
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

}  // namespace apsens
