// Copyright 2026 The lanewarp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lanewarp/pipeline/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>
#include <type_traits>

#include "lanewarp/culane.hpp"
#include "lanewarp/error.hpp"
#include "lanewarp/pipeline/digest.hpp"

namespace lanewarp {

namespace fs = std::filesystem;

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::kConfig, where + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.count(key)) {
      fail(ErrorKind::kConfig, where + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
T get_as(const Json& j, const char* key, const std::string& where) {
  try {
    const Json& v = j.at(key);
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<int64_t>() < 0)) {
        fail(ErrorKind::kConfig, where + "." + key + ": expected a non-negative integer");
      }
    }
    return v.get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::kConfig, where + "." + key + ": " + e.what());
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = get_as<T>(j, key, where);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

RectROI roi_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"x0", "y0", "width", "height"}, where);
  RectROI roi{get_as<uint32_t>(j, "x0", where), get_as<uint32_t>(j, "y0", where),
              get_as<uint32_t>(j, "width", where),
              get_as<uint32_t>(j, "height", where)};
  if (roi.width == 0 || roi.height == 0) {
    fail(ErrorKind::kConfig, where + ": width and height must be >= 1");
  }
  return roi;
}

Size2 size_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    fail(ErrorKind::kConfig, where + ": expected [width, height]");
  }
  for (const auto& v : j) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<int64_t>() < 0)) {
      fail(ErrorKind::kConfig, where + ": expected non-negative integers");
    }
  }
  Size2 s{j[0].get<uint32_t>(), j[1].get<uint32_t>()};
  if (s.w == 0 || s.h == 0) fail(ErrorKind::kConfig, where + ": zero size");
  return s;
}

std::array<PointF, 4> quad_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) {
    fail(ErrorKind::kConfig, where + ": expected 4 [x, y] points");
  }
  std::array<PointF, 4> pts;
  for (size_t i = 0; i < 4; ++i) {
    if (!j[i].is_array() || j[i].size() != 2 || !j[i][0].is_number() ||
        !j[i][1].is_number()) {
      fail(ErrorKind::kConfig, where + ": point " + std::to_string(i) +
                                   " must be [x, y]");
    }
    pts[i] = {j[i][0].get<double>(), j[i][1].get<double>()};
  }
  return pts;
}

Json quad_to_json(const std::array<PointF, 4>& pts) {
  Json arr = Json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

CameraModel camera_from_json(const Json& j) {
  const std::string where = "camera";
  check_keys(j, {"fx", "fy", "cx", "cy", "k1", "k2", "k3", "p1", "p2"}, where);
  CameraModel cam;
  cam.fx = get_as<double>(j, "fx", where);
  cam.fy = get_as<double>(j, "fy", where);
  cam.cx = get_as<double>(j, "cx", where);
  cam.cy = get_as<double>(j, "cy", where);
  read_opt(j, "k1", cam.k1, where);
  read_opt(j, "k2", cam.k2, where);
  read_opt(j, "k3", cam.k3, where);
  read_opt(j, "p1", cam.p1, where);
  read_opt(j, "p2", cam.p2, where);
  try {
    cam.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, where + ": " + e.what());
  }
  return cam;
}

void require_file(const fs::path& p, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) {
    fail(ErrorKind::kConfig, what + " '" + p.string() + "' does not exist");
  }
}

}  // namespace

Json roi_to_json(const RectROI& roi) {
  return {{"x0", roi.x0}, {"y0", roi.y0}, {"width", roi.width},
          {"height", roi.height}};
}

LabelerProfile profile_from_json(const Json& j, LabelerProfile p) {
  const std::string where = "labeler profile";
  check_keys(j,
             {"sdct_window", "edge_threshold", "hough_rho_res",
              "hough_theta_res", "theta_min", "theta_max", "accumulator_min",
              "anchor_rows", "merge_dist"},
             where);
  read_opt(j, "sdct_window", p.sdct_window, where);
  read_opt(j, "edge_threshold", p.edge_threshold, where);
  read_opt(j, "hough_rho_res", p.hough_rho_res, where);
  read_opt(j, "hough_theta_res", p.hough_theta_res, where);
  read_opt(j, "theta_min", p.theta_min, where);
  read_opt(j, "theta_max", p.theta_max, where);
  read_opt(j, "accumulator_min", p.accumulator_min, where);
  read_opt(j, "anchor_rows", p.anchor_rows, where);
  read_opt(j, "merge_dist", p.merge_dist, where);
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, where + ": " + e.what());
  }
  return p;
}

Json profile_to_json(const LabelerProfile& p) {
  return {{"sdct_window", p.sdct_window},
          {"edge_threshold", p.edge_threshold},
          {"hough_rho_res", p.hough_rho_res},
          {"hough_theta_res", p.hough_theta_res},
          {"theta_min", p.theta_min},
          {"theta_max", p.theta_max},
          {"accumulator_min", p.accumulator_min},
          {"anchor_rows", p.anchor_rows},
          {"merge_dist", p.merge_dist}};
}

PipelineConfig parse_config(const Json& doc, const fs::path& base_dir) {
  check_keys(doc,
             {"source_root", "output_root", "list_file", "roi", "warp",
              "warp_size", "out_size", "label_margin", "output_format",
              "mask_registry", "inpaint", "overlay", "overwrite",
              "parallelism", "camera", "labeler", "selection", "eval",
              "review"},
             "config");
  PipelineConfig cfg;
  const std::string top = "config";
  if (doc.contains("source_root")) {
    cfg.source_root = resolve(base_dir, get_as<std::string>(doc, "source_root", top));
  }
  if (doc.contains("output_root")) {
    cfg.output_root = resolve(base_dir, get_as<std::string>(doc, "output_root", top));
  }
  if (doc.contains("list_file")) {
    cfg.list_file = resolve(base_dir, get_as<std::string>(doc, "list_file", top));
  }
  if (doc.contains("roi")) cfg.roi = roi_from_json(doc["roi"], "roi");
  if (doc.contains("warp")) {
    const Json& w = doc["warp"];
    check_keys(w, {"src", "dst"}, "warp");
    QuadCorrespondence q;
    q.src = quad_from_json(w.at("src"), "warp.src");
    q.dst = quad_from_json(w.at("dst"), "warp.dst");
    cfg.warp = q;
  }
  if (doc.contains("warp_size")) {
    cfg.warp_size = size_from_json(doc["warp_size"], "warp_size");
  }
  if (doc.contains("out_size")) {
    cfg.out_size = size_from_json(doc["out_size"], "out_size");
  }
  read_opt(doc, "label_margin", cfg.label_margin, top);
  read_opt(doc, "output_format", cfg.output_format, top);
  if (cfg.output_format != "png" && cfg.output_format != "jpg") {
    fail(ErrorKind::kConfig, "output_format must be 'png' or 'jpg'");
  }
  if (doc.contains("mask_registry")) {
    const Json& m = doc["mask_registry"];
    if (!m.is_object()) fail(ErrorKind::kConfig, "mask_registry: expected an object");
    for (const auto& [prefix, path] : m.items()) {
      if (!path.is_string()) {
        fail(ErrorKind::kConfig, "mask_registry." + prefix + ": expected a path");
      }
      cfg.mask_registry[prefix] = resolve(base_dir, path.get<std::string>());
    }
  }
  if (doc.contains("inpaint")) {
    const Json& j = doc["inpaint"];
    const std::string where = "inpaint";
    check_keys(j, {"backend", "command", "max_iters", "tol", "pool_size",
                   "max_unmasked_mad"},
               where);
    const std::string backend = j.value("backend", std::string("builtin"));
    if (backend == "builtin") {
      cfg.inpaint.backend = InpaintBackend::kBuiltin;
    } else if (backend == "external") {
      cfg.inpaint.backend = InpaintBackend::kExternal;
    } else if (backend == "none") {
      cfg.inpaint.backend = InpaintBackend::kNone;
    } else {
      fail(ErrorKind::kConfig, "inpaint.backend must be builtin, external or none");
    }
    read_opt(j, "command", cfg.inpaint.command, where);
    read_opt(j, "max_iters", cfg.inpaint.diffusion.max_iters, where);
    read_opt(j, "tol", cfg.inpaint.diffusion.tol, where);
    read_opt(j, "pool_size", cfg.inpaint.pool_size, where);
    read_opt(j, "max_unmasked_mad", cfg.inpaint.external.max_unmasked_mad, where);
    try {
      cfg.inpaint.diffusion.validate();
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, e.what());
    }
    if (cfg.inpaint.backend == InpaintBackend::kExternal) {
      for (const char* key : {"{image}", "{mask}", "{output}"}) {
        if (cfg.inpaint.command.find(key) == std::string::npos) {
          fail(ErrorKind::kConfig,
               std::string("inpaint.command lacks placeholder ") + key);
        }
      }
    }
  }
  if (doc.contains("overlay") && !doc["overlay"].is_null()) {
    const Json& j = doc["overlay"];
    const std::string where = "overlay";
    check_keys(j, {"body", "mask", "feather_radius", "prune_labels"}, where);
    OverlaySettings o;
    o.body = resolve(base_dir, get_as<std::string>(j, "body", where));
    o.mask = resolve(base_dir, get_as<std::string>(j, "mask", where));
    read_opt(j, "feather_radius", o.feather_radius, where);
    read_opt(j, "prune_labels", o.prune_labels, where);
    cfg.overlay = o;
  }
  read_opt(doc, "overwrite", cfg.overwrite, top);
  read_opt(doc, "parallelism", cfg.parallelism, top);
  if (cfg.parallelism == 0) fail(ErrorKind::kConfig, "parallelism must be >= 1");
  if (doc.contains("camera") && !doc["camera"].is_null()) {
    cfg.camera = camera_from_json(doc["camera"]);
  }
  if (doc.contains("labeler")) {
    const Json& j = doc["labeler"];
    check_keys(j, {"profiles", "sequences"}, "labeler");
    if (j.contains("profiles")) {
      for (const auto& [name, body] : j["profiles"].items()) {
        cfg.labeler_profiles[name] = profile_from_json(body);
      }
    }
    if (j.contains("sequences")) {
      for (const auto& [prefix, name] : j["sequences"].items()) {
        const auto profile = name.get<std::string>();
        if (!cfg.labeler_profiles.count(profile)) {
          fail(ErrorKind::kConfig, "labeler.sequences." + prefix +
                                       ": unknown profile '" + profile + "'");
        }
        cfg.labeler_sequences[prefix] = profile;
      }
    }
  }
  if (doc.contains("selection")) {
    const Json& j = doc["selection"];
    const std::string where = "selection";
    check_keys(j, {"roi", "min_points_in_roi", "daylight_luma_min",
                   "sample_limit"},
               where);
    if (j.contains("roi")) cfg.selection.roi = roi_from_json(j["roi"], "selection.roi");
    read_opt(j, "min_points_in_roi", cfg.selection.min_points_in_roi, where);
    read_opt(j, "daylight_luma_min", cfg.selection.daylight_luma_min, where);
    if (j.contains("sample_limit") && !j["sample_limit"].is_null()) {
      cfg.selection.sample_limit = get_as<size_t>(j, "sample_limit", where);
    }
    try {
      cfg.selection.validate();
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, e.what());
    }
  }
  if (doc.contains("eval")) {
    const Json& j = doc["eval"];
    const std::string where = "eval";
    check_keys(j, {"strip_width", "iou_threshold", "frame_w", "frame_h"}, where);
    read_opt(j, "strip_width", cfg.eval.strip_width, where);
    read_opt(j, "iou_threshold", cfg.eval.iou_threshold, where);
    read_opt(j, "frame_w", cfg.eval.frame_w, where);
    read_opt(j, "frame_h", cfg.eval.frame_h, where);
    try {
      cfg.eval.validate();
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, e.what());
    }
  }
  if (doc.contains("review")) {
    const Json& j = doc["review"];
    const std::string where = "review";
    check_keys(j, {"host", "port", "static_dir"}, where);
    read_opt(j, "host", cfg.review.host, where);
    read_opt(j, "port", cfg.review.port, where);
    if (j.contains("static_dir")) {
      cfg.review.static_dir =
          resolve(base_dir, get_as<std::string>(j, "static_dir", where));
    }
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::kIo, e.what());
  }
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  return parse_config(doc, fs::absolute(path).parent_path());
}

Json canonical_json(const PipelineConfig& cfg) {
  Json j;
  j["source_root"] = cfg.source_root.generic_string();
  if (cfg.list_file) j["list_file"] = cfg.list_file->generic_string();
  if (cfg.roi) j["roi"] = roi_to_json(*cfg.roi);
  if (cfg.warp) {
    j["warp"] = {{"src", quad_to_json(cfg.warp->src)},
                 {"dst", quad_to_json(cfg.warp->dst)}};
  }
  if (cfg.warp_size) j["warp_size"] = {cfg.warp_size->w, cfg.warp_size->h};
  if (cfg.out_size) j["out_size"] = {cfg.out_size->w, cfg.out_size->h};
  j["label_margin"] = cfg.label_margin;
  j["output_format"] = cfg.output_format;
  Json masks = Json::object();
  for (const auto& [prefix, path] : cfg.mask_registry) {
    masks[prefix] = path.generic_string();
  }
  j["mask_registry"] = masks;
  const char* backend = cfg.inpaint.backend == InpaintBackend::kBuiltin ? "builtin"
                        : cfg.inpaint.backend == InpaintBackend::kExternal
                            ? "external"
                            : "none";
  j["inpaint"] = {{"backend", backend},
                  {"command", cfg.inpaint.command},
                  {"max_iters", cfg.inpaint.diffusion.max_iters},
                  {"tol", cfg.inpaint.diffusion.tol},
                  {"max_unmasked_mad", cfg.inpaint.external.max_unmasked_mad}};
  if (cfg.overlay) {
    j["overlay"] = {{"body", cfg.overlay->body.generic_string()},
                    {"mask", cfg.overlay->mask.generic_string()},
                    {"feather_radius", cfg.overlay->feather_radius},
                    {"prune_labels", cfg.overlay->prune_labels}};
  }
  if (cfg.camera) {
    const auto& c = *cfg.camera;
    j["camera"] = {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
                   {"k1", c.k1}, {"k2", c.k2}, {"k3", c.k3}, {"p1", c.p1},
                   {"p2", c.p2}};
  }
  Json profiles = Json::object();
  for (const auto& [name, p] : cfg.labeler_profiles) {
    profiles[name] = profile_to_json(p);
  }
  j["labeler"] = {{"profiles", profiles}, {"sequences", cfg.labeler_sequences}};
  j["selection"] = {{"roi", roi_to_json(cfg.selection.roi)},
                    {"min_points_in_roi", cfg.selection.min_points_in_roi},
                    {"daylight_luma_min", cfg.selection.daylight_luma_min},
                    {"sample_limit", cfg.selection.sample_limit
                                         ? Json(*cfg.selection.sample_limit)
                                         : Json(nullptr)}};
  j["eval"] = {{"strip_width", cfg.eval.strip_width},
               {"iou_threshold", cfg.eval.iou_threshold},
               {"frame_w", cfg.eval.frame_w},
               {"frame_h", cfg.eval.frame_h}};
  return j;
}

std::string config_digest(const PipelineConfig& cfg) {
  Json j = canonical_json(cfg);
  Json files = Json::object();
  std::error_code ec;
  auto add = [&](const fs::path& p) {
    if (fs::is_regular_file(p, ec)) files[p.generic_string()] = sha256_file(p);
  };
  for (const auto& [prefix, path] : cfg.mask_registry) add(path);
  if (cfg.overlay) {
    add(cfg.overlay->body);
    add(cfg.overlay->mask);
  }
  j["file_digests"] = files;
  return sha256_hex(j.dump());
}

void validate_for_augment(const PipelineConfig& cfg) {
  std::error_code ec;
  if (cfg.source_root.empty() || !fs::is_directory(cfg.source_root, ec)) {
    fail(ErrorKind::kConfig,
         "source_root '" + cfg.source_root.string() + "' is not a directory");
  }
  if (cfg.output_root.empty()) fail(ErrorKind::kConfig, "output_root is required");
  if (!cfg.roi) fail(ErrorKind::kConfig, "roi is required for augment");
  if (!cfg.warp) fail(ErrorKind::kConfig, "warp is required for augment");
  if (!cfg.out_size) fail(ErrorKind::kConfig, "out_size is required for augment");
  if (cfg.out_size->w < 16 || cfg.out_size->h < 16) {
    fail(ErrorKind::kConfig, "out_size must be at least 16x16");
  }
  try {
    cfg.warp->validate();
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, std::string("warp: ") + e.what());
  }
  if (cfg.list_file) require_file(*cfg.list_file, "list_file");
  for (const auto& [prefix, path] : cfg.mask_registry) {
    require_file(path, "mask for '" + prefix + "'");
  }
  if (cfg.overlay) {
    require_file(cfg.overlay->body, "overlay body");
    require_file(cfg.overlay->mask, "overlay mask");
  }
  if (cfg.inpaint.backend == InpaintBackend::kExternal &&
      cfg.inpaint.command.empty()) {
    fail(ErrorKind::kConfig, "inpaint.command is required for external backend");
  }
}

void validate_for_label(const PipelineConfig& cfg) {
  std::error_code ec;
  if (cfg.source_root.empty() || !fs::is_directory(cfg.source_root, ec)) {
    fail(ErrorKind::kConfig,
         "source_root '" + cfg.source_root.string() + "' is not a directory");
  }
  if (cfg.output_root.empty()) fail(ErrorKind::kConfig, "output_root is required");
  if (cfg.list_file) require_file(*cfg.list_file, "list_file");
}

const LabelerProfile& default_profile(const PipelineConfig& cfg) {
  static const LabelerProfile kDefault;
  auto it = cfg.labeler_profiles.find("default");
  return it == cfg.labeler_profiles.end() ? kDefault : it->second;
}

}  // namespace lanewarp
