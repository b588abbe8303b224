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

// Runs the ten primary acceptance checks and prints one line per check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "lanewarp/eval.hpp"
#include "lanewarp/geometry.hpp"
#include "lanewarp/inpaint.hpp"
#include "lanewarp/labeler.hpp"
#include "lanewarp/pipeline/config.hpp"
#include "lanewarp/pipeline/runner.hpp"
#include "support/fixture.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace lanewarp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Known (P, R, F1) rows.
Outcome score_rows() {
  double worst = 0;
  for (const auto& row : lwtest::score_rows()) {
    worst = std::max(worst, std::abs(f1_score(row.precision, row.recall) - row.f1));
  }
  return {worst <= 5e-4, std::to_string(lwtest::score_rows().size()) + " rows, max |dF1| " +
                             fmt("%.2e", worst)};
}

// 2. Predictions copied from ground truth.
Outcome perfect_predictions() {
  lwtest::TempDir gt, pred;
  std::mt19937 rng(2);
  DatasetIndex index;
  index.root = gt.path();
  for (int i = 0; i < 50; ++i) {
    FrameRecord rec;
    rec.image_path = "seq/" + std::to_string(i) + ".jpg";
    rec.label_path = lines_path_for(rec.image_path).generic_string();
    const std::string text = write_lines_file(lwtest::random_scene_lanes(kCulaneWidth, kCulaneHeight, rng));
    write_text_file(gt / rec.label_path, text);
    write_text_file(pred / rec.label_path, text);
    index.frames.push_back(rec);
  }
  const EvalReport r = evaluate_dataset(pred.path(), index, EvalConfig{});
  const bool ok = r.precision == 1.0 && r.recall == 1.0 && r.f1 == 1.0 && r.per_frame.size() == 50;
  return {ok, "50 frames, " + std::to_string(r.tp) + " lanes, P " + fmt("%.6f", r.precision) +
                  " R " + fmt("%.6f", r.recall) + " F1 " + fmt("%.6f", r.f1)};
}

// 3. Random four-point homographies.
Outcome homography_suite() {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coord(0, 1000), t(-0.5, 1.5);
  auto well_spread = [](const std::array<PointF, 4>& q) {
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        for (int k = j + 1; k < 4; ++k)
          if (std::abs(cross(q[i], q[j], q[k])) < 2e4) return false;
    return true;
  };
  double corner = 0, round_trip = 0, collinear = 0;
  int cases = 0;
  while (cases < 1000) {
    QuadCorrespondence q;
    for (int i = 0; i < 4; ++i) {
      q.src[i] = {coord(rng), coord(rng)};
      q.dst[i] = {coord(rng), coord(rng)};
    }
    if (!well_spread(q.src) || !well_spread(q.dst)) continue;
    ++cases;
    const Homography h = estimate_homography(q);
    const Homography inv = invert(h);
    for (int i = 0; i < 4; ++i) corner = std::max(corner, distance(apply_point(h, q.src[i]), q.dst[i]));
    for (int k = 0; k < 5; ++k) {
      // Points near the source quad keep clear of the line at infinity.
      const PointF p{q.src[0].x + t(rng) * (q.src[2].x - q.src[0].x) * 0.3,
                     q.src[0].y + t(rng) * (q.src[2].y - q.src[0].y) * 0.3};
      const auto hp = try_apply_point(h, p);
      if (!hp) continue;
      round_trip = std::max(round_trip, distance(apply_point(inv, *hp), p));
    }
    const PointF a = q.src[0], b = q.src[2];
    const double s = t(rng) * 0.5 + 0.25;
    const PointF c{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
    const auto ha = try_apply_point(h, a), hb = try_apply_point(h, b), hc = try_apply_point(h, c);
    if (ha && hb && hc) {
      // Distance of H(c) from the line through H(a) and H(b).
      collinear = std::max(collinear, std::abs(cross(*ha, *hb, *hc)) / distance(*ha, *hb));
    }
  }
  const bool ok = corner < 1e-6 && round_trip < 1e-6 && collinear < 1e-6;
  return {ok, "1000 quads, corner " + fmt("%.1e", corner) + " px, round trip " +
                  fmt("%.1e", round_trip) + " px, collinearity " + fmt("%.1e", collinear) + " px"};
}

// 4. Labels and markings stay together through crop, warp and resize.
Outcome label_image_consistency() {
  lwtest::TempDir dir;
  const PipelineConfig cfg = parse_config(lwtest::augment_config_json(), dir.path());
  const RectROI roi = *cfg.roi;
  const Homography h = estimate_homography(*cfg.warp);
  const Homography hinv = invert(h);
  LaneTransform t;
  t.roi = roi;
  t.h = h;
  t.scale_x = double(lwtest::kOutW) / roi.width;
  t.scale_y = double(lwtest::kOutH) / roi.height;
  t.out_w = lwtest::kOutW;
  t.out_h = lwtest::kOutH;
  t.margin = cfg.label_margin;
  auto forward = [&](PointF p) {
    const PointF w = apply_point(h, {p.x - roi.x0, p.y - roi.y0});
    return PointF{(w.x + 0.5) * t.scale_x - 0.5, (w.y + 0.5) * t.scale_y - 0.5};
  };
  auto backward = [&](PointF q) {
    const PointF w = apply_point(hinv, {(q.x + 0.5) / t.scale_x - 0.5, (q.y + 0.5) / t.scale_y - 0.5});
    return PointF{w.x + roi.x0, w.y + roi.y0};
  };

  const double width = 12.0;
  std::mt19937 rng(4);
  double worst = 1.0;
  size_t lanes = 0;
  for (int scene = 0; scene < 20; ++scene) {
    const LabelSet labels = lwtest::random_scene_lanes(lwtest::kSrcW, lwtest::kSrcH, rng);
    const LabelSet moved = transform_labels(labels, t);
    if (moved.size() != labels.size()) return {false, "scene " + std::to_string(scene) + " lost a lane"};
    for (size_t i = 0; i < labels.size(); ++i) {
      // Image route: paint, then crop, warp, resize and threshold.
      ImageBuffer img(lwtest::kSrcW, lwtest::kSrcH, 1, 0);
      lwtest::paint_lane(img, labels.lanes()[i], width, 255);
      const ImageBuffer out = resize_bilinear(warp_image(crop(img, roi), h, roi.width, roi.height),
                                              lwtest::kOutW, lwtest::kOutH);
      const BinaryMask a = BinaryMask::from_image(out);

      // Label route: stamp the moved polyline with the strip's local width.
      const LaneLabel& src = labels.lanes()[i];
      const PointF d0{src.points().back().x - src.points().front().x,
                      src.points().back().y - src.points().front().y};
      const double len = std::hypot(d0.x, d0.y);
      const PointF n{-d0.y / len, d0.x / len};
      BinaryMask b(lwtest::kOutW, lwtest::kOutH);
      const auto& pts = moved.lanes()[i].points();
      for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const PointF p = pts[k], q = pts[k + 1];
        const double seg = distance(p, q);
        const PointF dir{(q.x - p.x) / seg, (q.y - p.y) / seg};
        const int steps = std::max(1, int(std::ceil(seg / 0.25)));
        for (int s = 0; s <= steps; ++s) {
          const PointF u{p.x + (q.x - p.x) * s / steps, p.y + (q.y - p.y) * s / steps};
          const PointF o = backward(u);
          const PointF e1 = forward({o.x + n.x * width / 2, o.y + n.y * width / 2});
          const PointF e2 = forward({o.x - n.x * width / 2, o.y - n.y * width / 2});
          const PointF v{e1.x - e2.x, e1.y - e2.y};
          const double along = v.x * dir.x + v.y * dir.y;
          const double r = 0.5 * std::hypot(v.x - along * dir.x, v.y - along * dir.y);
          for (int y = int(std::ceil(u.y - r)); y <= int(std::floor(u.y + r)); ++y) {
            for (int x = int(std::ceil(u.x - r)); x <= int(std::floor(u.x + r)); ++x) {
              if (x < 0 || y < 0 || x >= int(lwtest::kOutW) || y >= int(lwtest::kOutH)) continue;
              if (std::hypot(x - u.x, y - u.y) <= r) b.set(uint32_t(x), uint32_t(y), true);
            }
          }
        }
      }
      worst = std::min(worst, lane_iou(a, b));
      ++lanes;
    }
  }
  return {worst >= 0.90, "20 scenes, " + std::to_string(lanes) + " lanes, min IoU " + fmt("%.4f", worst)};
}

// 5. Diffusion fill against a dense Laplace solve.
Outcome inpainting_oracle() {
  std::mt19937 rng(5);
  double worst = 0;
  bool identical = true, bounded = true;
  for (int trial = 0; trial < 25; ++trial) {
    const ImageBuffer img = lwtest::random_image(32, 32, 1, rng);
    BinaryMask mask(32, 32);
    for (int blob = 0; blob < 2; ++blob) {
      const uint32_t w = 3 + rng() % 8, hgt = 3 + rng() % 8;
      const uint32_t ox = rng() % (32 - w), oy = rng() % (32 - hgt);
      for (uint32_t y = oy; y < oy + hgt; ++y)
        for (uint32_t x = ox; x < ox + w; ++x) mask.set(x, y, true);
    }
    const auto exact = lwtest::dense_laplace(img, mask);
    const ImageBuffer out = diffusion_inpaint(img, mask);
    size_t k = 0;
    for (uint32_t y = 0; y < 32; ++y)
      for (uint32_t x = 0; x < 32; ++x) {
        if (mask.at(x, y)) {
          worst = std::max(worst, std::abs(out.at(x, y) - exact[k++]));
        } else {
          identical = identical && out.at(x, y) == img.at(x, y);
        }
      }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const ImageBuffer img = lwtest::random_image(24, 24, 3, rng);
    BinaryMask mask(24, 24);
    for (int k = 0; k < 150; ++k) mask.set(rng() % 24, rng() % 24, true);
    mask.set(0, 0, false);
    const ImageBuffer out = diffusion_inpaint(img, mask);
    for (uint32_t c = 0; c < 3; ++c) {
      int lo = 255, hi = 0;
      for (uint32_t y = 0; y < 24; ++y)
        for (uint32_t x = 0; x < 24; ++x) {
          if (mask.at(x, y)) continue;
          const bool ring = (x > 0 && mask.at(x - 1, y)) || (x < 23 && mask.at(x + 1, y)) ||
                            (y > 0 && mask.at(x, y - 1)) || (y < 23 && mask.at(x, y + 1));
          if (!ring) continue;
          lo = std::min(lo, int(img.at(x, y, c)));
          hi = std::max(hi, int(img.at(x, y, c)));
        }
      for (uint32_t y = 0; y < 24; ++y)
        for (uint32_t x = 0; x < 24; ++x)
          if (mask.at(x, y)) bounded = bounded && out.at(x, y, c) >= lo && out.at(x, y, c) <= hi;
    }
  }
  const bool ok = worst <= 1.0 && identical && bounded;
  return {ok, "25 oracle cases, max |diff| " + fmt("%.3f", worst) + ", unmasked " +
                  (identical ? "identical" : "CHANGED") + ", max principle " +
                  (bounded ? "held" : "VIOLATED") + " on 100 cases"};
}

// 6. Windowed DCT against the double sum.
Outcome sdct_oracle() {
  std::mt19937 rng(6);
  double worst = 0;
  for (uint32_t w : {4u, 8u}) {
    for (int trial = 0; trial < 300; ++trial) {
      const ImageBuffer img = lwtest::random_image(w + 5, w + 5, 1, rng);
      const uint32_t x0 = rng() % 6, y0 = rng() % 6;
      const auto fast = dct2_window(img, x0, y0, w);
      const auto slow = lwtest::brute_dct(img, x0, y0, w);
      for (size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
    }
  }
  bool empty = true;
  for (int v : {0, 37, 128, 255}) {
    empty = empty && sdct_edge_map(ImageBuffer(96, 64, 1, uint8_t(v)), 8, 0.15).none();
  }
  return {worst <= 1e-9 && empty, "600 windows (4x4, 8x8), max |diff| " + fmt("%.1e", worst) +
                                      ", constant images " + (empty ? "empty" : "NOT EMPTY")};
}

// 7. Hough recovery of random lines inside the angle window.
Outcome hough_recovery() {
  const LabelerProfile p;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> angle(p.theta_min + 0.01, p.theta_max - 0.01);
  std::uniform_real_distribution<double> px(400, 1240), py(150, 440);
  double theta_err = 0, rho_err = 0;
  for (int trial = 0; trial < 50; ++trial) {
    double theta = angle(rng);
    if (trial % 2) theta = std::numbers::pi - theta;
    const double rho = px(rng) * std::cos(theta) + py(rng) * std::sin(theta);
    BinaryMask m(kCulaneWidth, kCulaneHeight);
    lwtest::draw_line(m, rho, theta);
    const auto lines = hough_lines(m, p);
    if (lines.empty()) return {false, "no line found for trial " + std::to_string(trial)};
    theta_err = std::max(theta_err, std::abs(lines[0].theta - theta));
    rho_err = std::max(rho_err, std::abs(lines[0].rho - rho));
  }
  const double deg = theta_err * 180 / std::numbers::pi;
  return {deg <= 1.0 && rho_err <= 2.0,
          "50 lines, max theta error " + fmt("%.3f", deg) + " deg, max rho error " + fmt("%.3f", rho_err) + " px"};
}

// 8. Greedy matching against exhaustive assignment.
Outcome matching_optimality() {
  const EvalConfig cfg;
  std::mt19937 rng(8);
  int unique = 0, ambiguous = 0, agree = 0;
  while (unique < 500) {
    const auto inst = lwtest::random_match_instance(rng);
    const auto iou = iou_matrix(inst.preds, inst.gts, cfg);
    bool is_unique = false;
    const auto best = lwtest::optimal_assignment(iou, inst.gts.size(), cfg.iou_threshold, &is_unique);
    if (!is_unique) {
      ++ambiguous;
      continue;
    }
    ++unique;
    const MatchResult m = match_from_matrix(iou, inst.gts.size(), cfg.iou_threshold);
    std::vector<std::pair<size_t, size_t>> got;
    for (const auto& pair : m.pairs) got.push_back({pair.pred, pair.gt});
    std::sort(got.begin(), got.end());
    agree += got == best.pairs;
  }
  return {agree == unique, std::to_string(agree) + "/" + std::to_string(unique) +
                               " unique-optimum instances agree (" + std::to_string(ambiguous) +
                               " tied instances skipped)"};
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), root).generic_string();
    if (rel == kAugmentManifest) continue;
    out[rel] = read_text_file(e.path());
  }
  return out;
}

Json manifest_without_times(const fs::path& root) {
  Json m = Json::parse(read_text_file(root / kAugmentManifest));
  m.erase("started");
  m.erase("finished");
  return m;
}

// 9. Byte-identical augment runs.
Outcome end_to_end_determinism() {
  lwtest::TempDir dir;
  lwtest::write_augment_fixture(dir.path(), 20);
  const unsigned workers = 4;
  const PipelineConfig a = parse_config(lwtest::augment_config_json(), dir.path());
  Json doc = lwtest::augment_config_json();
  doc["output_root"] = "second";
  const PipelineConfig b = parse_config(doc, dir.path());
  doc["output_root"] = "parallel";
  doc["parallelism"] = workers;
  const PipelineConfig c = parse_config(doc, dir.path());
  const DatasetIndex index = load_index(a);
  const RunManifest ma = run_augment(a, index);
  run_augment(b, index);
  run_augment(c, index);
  const auto ta = tree_bytes(a.output_root);
  const bool files = ta == tree_bytes(b.output_root) && ta == tree_bytes(c.output_root);
  const Json m = manifest_without_times(a.output_root);
  const bool manifests = m == manifest_without_times(b.output_root) && m == manifest_without_times(c.output_root);
  const bool all_ok = ma.count(kStatusOk) == 20;
  return {files && manifests && all_ok,
          "20 frames x 3 runs (1, 1, " + std::to_string(workers) + " workers), " +
              std::to_string(ta.size()) + " files " + (files ? "identical" : "DIFFER") + ", manifests " +
              (manifests ? "identical" : "DIFFER") + ", " + std::to_string(ma.count(kStatusOk)) + " ok"};
}

// 10. Lines-file fixed point.
Outcome format_round_trip() {
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> x(-60, 1700), y(0, 589);
  int fixed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    LabelSet set;
    if (trial % 2) {
      set = lwtest::random_label_set(rng);
    } else {
      std::vector<LaneLabel> lanes;
      for (int i = 0; i < int(rng() % 5); ++i) {
        std::vector<PointF> pts;
        for (int k = 0; k < 2 + int(rng() % 20); ++k) pts.push_back({x(rng), y(rng)});
        if (auto lane = LaneLabel::try_make(pts)) lanes.push_back(*lane);
      }
      set = LabelSet(std::move(lanes));
    }
    const std::string once = write_lines_file(set);
    fixed += write_lines_file(parse_lines_file(once)) == once;
  }
  return {fixed == 1000, std::to_string(fixed) + "/1000 label sets are byte-level fixed points"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "score fixtures", 1, score_rows},
      {2, "perfect-prediction identity", 10, perfect_predictions},
      {3, "homography suite", 5, homography_suite},
      {4, "label-image consistency", 30, label_image_consistency},
      {5, "inpainting oracle", 20, inpainting_oracle},
      {6, "SDCT oracle", 10, sdct_oracle},
      {7, "Hough recovery", 30, hough_recovery},
      {8, "matching optimality", 10, matching_optimality},
      {9, "end-to-end determinism", 60, end_to_end_determinism},
      {10, "format round trip", 5, format_round_trip},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.ok && in_time;
    failed += !pass;
    std::printf("[%s] %2d %-28s %s; %.2f s (limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_s, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
