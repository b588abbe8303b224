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

#include "lanewarp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "lanewarp/error.hpp"

namespace lanewarp {

namespace fs = std::filesystem;

namespace {

struct Raster {
  BinaryMask mask;
  uint32_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open bbox
  size_t area = 0;
};

void stamp_disc(BinaryMask& mask, double cx, double cy, double r,
                Raster* bbox) {
  const double r2 = r * r;
  const int ylo = std::max(0, static_cast<int>(std::ceil(cy - r)));
  const int yhi = std::min(static_cast<int>(mask.height()) - 1,
                           static_cast<int>(std::floor(cy + r)));
  for (int y = ylo; y <= yhi; ++y) {
    const double dy = y - cy;
    const double half = std::sqrt(std::max(0.0, r2 - dy * dy));
    const int xlo = std::max(0, static_cast<int>(std::ceil(cx - half)));
    const int xhi = std::min(static_cast<int>(mask.width()) - 1,
                             static_cast<int>(std::floor(cx + half)));
    for (int x = xlo; x <= xhi; ++x) {
      mask.set(static_cast<uint32_t>(x), static_cast<uint32_t>(y), true);
    }
    if (bbox && xlo <= xhi) {
      bbox->x0 = std::min<uint32_t>(bbox->x0, xlo);
      bbox->x1 = std::max<uint32_t>(bbox->x1, xhi + 1);
      bbox->y0 = std::min<uint32_t>(bbox->y0, y);
      bbox->y1 = std::max<uint32_t>(bbox->y1, y + 1);
    }
  }
}

Raster rasterize(const LaneLabel& lane, const EvalConfig& cfg) {
  Raster out{BinaryMask(cfg.frame_w, cfg.frame_h), cfg.frame_w, cfg.frame_h, 0,
             0, 0};
  const double r = cfg.strip_width / 2.0;
  const double w = cfg.frame_w, h = cfg.frame_h;
  const auto& pts = lane.points();
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const PointF a = pts[i];
    const PointF b = pts[i + 1];
    if (std::max(a.x, b.x) < -r || std::min(a.x, b.x) > w - 1 + r ||
        std::max(a.y, b.y) < -r || std::min(a.y, b.y) > h - 1 + r) {
      continue;
    }
    const auto steps =
        std::max<size_t>(1, static_cast<size_t>(std::ceil(distance(a, b) / 0.5)));
    for (size_t k = 0; k <= steps; ++k) {
      const double t = double(k) / double(steps);
      stamp_disc(out.mask, a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), r,
                 &out);
    }
  }
  if (out.x1 == 0) {
    out.x0 = out.y0 = 0;
  }
  out.area = out.mask.count();
  return out;
}

double raster_iou(const Raster& a, const Raster& b) {
  const size_t uni_base = a.area + b.area;
  if (uni_base == 0) return 0.0;
  const uint32_t x0 = std::max(a.x0, b.x0), x1 = std::min(a.x1, b.x1);
  const uint32_t y0 = std::max(a.y0, b.y0), y1 = std::min(a.y1, b.y1);
  size_t inter = 0;
  if (x0 < x1 && y0 < y1) {
    const auto abits = a.mask.bits();
    const auto bbits = b.mask.bits();
    const uint32_t w = a.mask.width();
    for (uint32_t y = y0; y < y1; ++y) {
      for (uint32_t x = x0; x < x1; ++x) {
        const size_t i = size_t(y) * w + x;
        inter += abits[i] & bbits[i];
      }
    }
  }
  return double(inter) / double(uni_base - inter);
}

}  // namespace

void EvalConfig::validate() const {
  if (strip_width < 1) {
    fail(ErrorKind::kInvalidArgument, "strip_width must be >= 1");
  }
  if (!(iou_threshold > 0 && iou_threshold <= 1)) {
    fail(ErrorKind::kInvalidArgument, "iou_threshold must be in (0, 1]");
  }
  if (frame_w == 0 || frame_h == 0) {
    fail(ErrorKind::kInvalidArgument, "evaluation frame must be non-empty");
  }
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0 ? 2 * precision * recall / s : 0.0;
}

Scores scores_from_counts(size_t tp, size_t fp, size_t fn) {
  Scores s;
  s.precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

BinaryMask rasterize_lane(const LaneLabel& lane, const EvalConfig& cfg) {
  cfg.validate();
  return rasterize(lane, cfg).mask;
}

double lane_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    fail(ErrorKind::kInvalidArgument, "lane_iou: mask dimensions differ");
  }
  size_t inter = 0, uni = 0;
  const auto abits = a.bits();
  const auto bbits = b.bits();
  for (size_t i = 0; i < abits.size(); ++i) {
    inter += abits[i] & bbits[i];
    uni += abits[i] | bbits[i];
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

std::vector<std::vector<double>> iou_matrix(const LabelSet& preds,
                                            const LabelSet& gts,
                                            const EvalConfig& cfg) {
  cfg.validate();
  std::vector<Raster> gt_r;
  gt_r.reserve(gts.size());
  for (const auto& lane : gts.lanes()) gt_r.push_back(rasterize(lane, cfg));
  std::vector<std::vector<double>> m(preds.size(),
                                     std::vector<double>(gts.size(), 0.0));
  for (size_t i = 0; i < preds.size(); ++i) {
    const Raster pr = rasterize(preds.lanes()[i], cfg);
    for (size_t j = 0; j < gts.size(); ++j) m[i][j] = raster_iou(pr, gt_r[j]);
  }
  return m;
}

MatchResult match_from_matrix(const std::vector<std::vector<double>>& iou,
                              size_t n_gts, double threshold) {
  const size_t n_preds = iou.size();
  std::vector<bool> pred_used(n_preds, false), gt_used(n_gts, false);
  MatchResult result;
  while (true) {
    double best = -1.0;
    size_t bi = 0, bj = 0;
    for (size_t i = 0; i < n_preds; ++i) {
      if (pred_used[i]) continue;
      for (size_t j = 0; j < n_gts; ++j) {
        if (gt_used[j]) continue;
        // Strict '>' keeps the lowest (pred, gt) on ties.
        if (iou[i][j] > best) {
          best = iou[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    if (best < 0 || best < threshold) break;
    pred_used[bi] = gt_used[bj] = true;
    result.pairs.push_back({bi, bj, best});
  }
  result.tp = result.pairs.size();
  result.fp = n_preds - result.tp;
  result.fn = n_gts - result.tp;
  return result;
}

MatchResult match_lanes(const LabelSet& preds, const LabelSet& gts,
                        const EvalConfig& cfg) {
  return match_from_matrix(iou_matrix(preds, gts, cfg), gts.size(),
                           cfg.iou_threshold);
}

EvalReport evaluate_dataset(const fs::path& pred_root,
                            const DatasetIndex& gt_index,
                            const EvalConfig& cfg) {
  cfg.validate();
  EvalReport report;
  for (const auto& rec : gt_index.frames) {
    if (!rec.labeled()) continue;
    LabelSet gts;
    try {
      gts = read_lines_file(gt_index.root / rec.label_path);
    } catch (const Error& e) {
      report.warnings.push_back("ground truth unreadable, frame skipped: " +
                                std::string(e.what()));
      continue;
    }
    LabelSet preds;
    const fs::path pred_path =
        pred_root / lines_path_for(rec.image_path);
    std::error_code ec;
    if (!fs::exists(pred_path, ec)) {
      report.warnings.push_back(rec.image_path +
                                ": no prediction file, scored as empty");
    } else {
      try {
        preds = read_lines_file(pred_path);
      } catch (const Error& e) {
        report.warnings.push_back(rec.image_path +
                                  ": prediction unparseable, scored as empty (" +
                                  e.what() + ")");
      }
    }
    const MatchResult m = match_lanes(preds, gts, cfg);
    report.tp += m.tp;
    report.fp += m.fp;
    report.fn += m.fn;
    report.per_frame.push_back({rec.image_path, m.tp, m.fp, m.fn});
  }
  const Scores s = scores_from_counts(report.tp, report.fp, report.fn);
  report.precision = s.precision;
  report.recall = s.recall;
  report.f1 = s.f1;
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["tp"] = report.tp;
  j["fp"] = report.fp;
  j["fn"] = report.fn;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["warnings"] = report.warnings;
  auto frames = nlohmann::ordered_json::array();
  for (const auto& f : report.per_frame) {
    frames.push_back({{"frame", f.frame}, {"tp", f.tp}, {"fp", f.fp},
                      {"fn", f.fn}});
  }
  j["per_frame"] = std::move(frames);
  return j.dump(2) + "\n";
}

std::string report_to_text(const EvalReport& report) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-10s %10s\n", "metric", "value");
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %10zu\n", "tp", report.tp);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %10zu\n", "fp", report.fp);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %10zu\n", "fn", report.fn);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %10.4f\n", "precision",
                report.precision);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %10.4f\n", "recall", report.recall);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %10.4f\n", "f1", report.f1);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-10s %10zu\n", "frames",
                report.per_frame.size());
  out += buf;
  if (!report.warnings.empty()) {
    std::snprintf(buf, sizeof(buf), "%-10s %10zu\n", "warnings",
                  report.warnings.size());
    out += buf;
  }
  return out;
}

}  // namespace lanewarp
