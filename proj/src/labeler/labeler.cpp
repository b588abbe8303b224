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

#include "lanewarp/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lanewarp/error.hpp"

namespace lanewarp {

namespace {

struct ThetaBranch {
  std::vector<double> thetas;
  std::vector<double> cos_t;
  std::vector<double> sin_t;
};

ThetaBranch make_branch(double start, double stop, double step) {
  ThetaBranch b;
  const auto n = static_cast<size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (size_t i = 0; i < n; ++i) {
    const double t = start + i * step;
    b.thetas.push_back(t);
    b.cos_t.push_back(std::cos(t));
    b.sin_t.push_back(std::sin(t));
  }
  return b;
}

// Total least squares line through the selected pixels, with theta kept
// within half a turn of the hint.
template <typename Take>
bool fit_line(const std::vector<uint32_t>& xs, const std::vector<uint32_t>& ys,
              Take take, double theta_hint, HoughLine& out) {
  double mx = 0, my = 0;
  size_t n = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!take(i)) continue;
    mx += xs[i];
    my += ys[i];
    ++n;
  }
  if (n < 2) return false;
  mx /= double(n);
  my /= double(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!take(i)) continue;
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  // Normal = eigenvector of the smaller eigenvalue of the scatter matrix.
  double theta = 0.5 * std::atan2(2 * sxy, sxx - syy) + std::numbers::pi / 2;
  theta = std::remainder(theta - theta_hint, std::numbers::pi) + theta_hint;
  out.theta = theta;
  out.rho = mx * std::cos(theta) + my * std::sin(theta);
  return true;
}

constexpr double kMaxRefineTurn = std::numbers::pi / 36;

// Refit a line to the pixels within tol of it, a few rounds.
HoughLine regrow(const std::vector<uint32_t>& xs, const std::vector<uint32_t>& ys,
                 HoughLine line, double tol) {
  const double theta0 = line.theta;
  for (int round = 0; round < 4; ++round) {
    const double c = std::cos(line.theta), s = std::sin(line.theta);
    HoughLine next = line;
    auto near = [&](size_t i) { return std::abs(xs[i] * c + ys[i] * s - line.rho) <= tol; };
    if (!fit_line(xs, ys, near, theta0, next)) break;
    if (std::abs(next.theta - theta0) > kMaxRefineTurn) break;
    line = next;
  }
  return line;
}

// Seeded by the pixels that voted for one accumulator cell.
HoughLine refine_peak(const std::vector<uint32_t>& xs, const std::vector<uint32_t>& ys,
                      double cos_t, double sin_t, int r, double rho_res,
                      uint32_t votes) {
  const double theta0 = std::atan2(sin_t, cos_t);
  HoughLine line{r * rho_res, theta0, votes};
  const double cc = cos_t / rho_res, ss = sin_t / rho_res;
  auto in_cell = [&](size_t i) { return std::lround(xs[i] * cc + ys[i] * ss) == r; };
  HoughLine seeded = line;
  if (!fit_line(xs, ys, in_cell, theta0, seeded) ||
      std::abs(seeded.theta - theta0) > kMaxRefineTurn) {
    return line;
  }
  return regrow(xs, ys, seeded, rho_res);
}

void edge_pixels(const BinaryMask& edges, std::vector<uint32_t>& xs,
                 std::vector<uint32_t>& ys) {
  for (uint32_t y = 0; y < edges.height(); ++y) {
    for (uint32_t x = 0; x < edges.width(); ++x) {
      if (edges.at(x, y)) {
        xs.push_back(x);
        ys.push_back(y);
      }
    }
  }
}

}  // namespace

std::vector<double> LabelerProfile::default_anchor_rows() {
  std::vector<double> rows;
  for (int y = 589; y >= 230; y -= 20) rows.push_back(y);
  return rows;
}

void LabelerProfile::validate() const {
  if (sdct_window < 4 || (sdct_window & (sdct_window - 1)) != 0) {
    fail(ErrorKind::kInvalidArgument,
         "sdct_window must be a power of two >= 4");
  }
  if (!(edge_threshold >= 0 && edge_threshold <= 1)) {
    fail(ErrorKind::kInvalidArgument, "edge_threshold must be in [0, 1]");
  }
  if (!(hough_rho_res > 0) || !(hough_theta_res > 0)) {
    fail(ErrorKind::kInvalidArgument, "Hough resolutions must be positive");
  }
  if (!(theta_min >= 0 && theta_min < theta_max &&
        theta_max <= std::numbers::pi / 2)) {
    fail(ErrorKind::kInvalidArgument,
         "theta window must satisfy 0 <= theta_min < theta_max <= pi/2");
  }
  if (accumulator_min < 1) {
    fail(ErrorKind::kInvalidArgument, "accumulator_min must be >= 1");
  }
  if (anchor_rows.empty()) {
    fail(ErrorKind::kInvalidArgument, "anchor_rows must not be empty");
  }
  for (size_t i = 1; i < anchor_rows.size(); ++i) {
    if (!(anchor_rows[i] < anchor_rows[i - 1])) {
      fail(ErrorKind::kInvalidArgument, "anchor_rows must strictly decrease");
    }
  }
  if (!(merge_dist >= 0)) {
    fail(ErrorKind::kInvalidArgument, "merge_dist must be >= 0");
  }
}

std::vector<HoughLine> hough_lines(const BinaryMask& edges,
                                   const LabelerProfile& p) {
  p.validate();
  std::vector<HoughLine> found;
  if (edges.none()) return found;

  const double diag = std::hypot(double(edges.width()), double(edges.height()));
  const auto offset = static_cast<int>(std::ceil(diag / p.hough_rho_res));
  const int nrho = 2 * offset + 1;
  const double pi = std::numbers::pi;
  const ThetaBranch branches[2] = {
      make_branch(p.theta_min, p.theta_max, p.hough_theta_res),
      make_branch(pi - p.theta_max, pi - p.theta_min, p.hough_theta_res)};

  std::vector<uint32_t> xs, ys;
  edge_pixels(edges, xs, ys);

  for (const auto& branch : branches) {
    const int ntheta = static_cast<int>(branch.thetas.size());
    std::vector<uint32_t> acc(size_t(ntheta) * nrho, 0);
    for (int t = 0; t < ntheta; ++t) {
      const double c = branch.cos_t[t] / p.hough_rho_res;
      const double s = branch.sin_t[t] / p.hough_rho_res;
      uint32_t* row = &acc[size_t(t) * nrho];
      for (size_t i = 0; i < xs.size(); ++i) {
        const int r = static_cast<int>(std::lround(xs[i] * c + ys[i] * s));
        ++row[r + offset];
      }
    }
    // 3x3 maximum; plateaus resolve to their first cell in raster order.
    for (int t = 0; t < ntheta; ++t) {
      for (int r = 0; r < nrho; ++r) {
        const uint32_t v = acc[size_t(t) * nrho + r];
        if (v < p.accumulator_min) continue;
        bool peak = true;
        for (int dt = -1; dt <= 1 && peak; ++dt) {
          for (int dr = -1; dr <= 1; ++dr) {
            if (dt == 0 && dr == 0) continue;
            const int tt = t + dt, rr = r + dr;
            if (tt < 0 || tt >= ntheta || rr < 0 || rr >= nrho) continue;
            const uint32_t n = acc[size_t(tt) * nrho + rr];
            const bool earlier = dt < 0 || (dt == 0 && dr < 0);
            if (earlier ? n >= v : n > v) {
              peak = false;
              break;
            }
          }
        }
        if (peak) {
          found.push_back(refine_peak(xs, ys, branch.cos_t[t], branch.sin_t[t],
                                      r - offset, p.hough_rho_res, v));
        }
      }
    }
  }

  std::sort(found.begin(), found.end(), [](const HoughLine& a, const HoughLine& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.rho != b.rho) return a.rho < b.rho;
    return a.theta < b.theta;
  });
  return found;
}

LaneExtraction lines_to_lanes(const std::vector<HoughLine>& lines,
                              const LabelerProfile& p, uint32_t width,
                              uint32_t height) {
  if (width == 0 || height == 0) {
    fail(ErrorKind::kInvalidArgument, "frame dimensions must be positive");
  }
  struct Candidate {
    const HoughLine* line;
    std::vector<PointF> samples;  // follows anchor_rows order
  };

  LaneExtraction result;
  std::vector<HoughLine> ordered = lines;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const HoughLine& a, const HoughLine& b) {
                     return a.votes > b.votes;
                   });

  std::vector<Candidate> kept;
  for (const auto& line : ordered) {
    const double c = std::cos(line.theta);
    if (std::abs(c) < 1e-6) {
      ++result.discarded_horizontal;
      continue;
    }
    const double s = std::sin(line.theta);
    Candidate cand{&line, {}};
    for (double y : p.anchor_rows) {
      const double x = (line.rho - y * s) / c;
      if (x < -50.0 || x > width + 50.0) continue;
      cand.samples.push_back({x, y});
    }
    if (cand.samples.size() < 2) continue;

    bool merged = false;
    for (const auto& other : kept) {
      // Bottom-most anchor row sampled by both lines.
      for (const auto& a : cand.samples) {
        auto it = std::find_if(other.samples.begin(), other.samples.end(),
                               [&](const PointF& b) { return b.y == a.y; });
        if (it == other.samples.end()) continue;
        merged = std::abs(it->x - a.x) < p.merge_dist;
        break;
      }
      if (merged) break;
    }
    if (!merged) kept.push_back(std::move(cand));
  }

  const double centre = width / 2.0;
  std::stable_sort(kept.begin(), kept.end(),
                   [&](const Candidate& a, const Candidate& b) {
                     return std::abs(a.samples.front().x - centre) <
                            std::abs(b.samples.front().x - centre);
                   });
  if (kept.size() > kMaxLanes) kept.resize(kMaxLanes);

  std::vector<LaneLabel> lanes;
  for (auto& cand : kept) lanes.emplace_back(std::move(cand.samples));
  result.labels = LabelSet(std::move(lanes), width, height);
  return result;
}

ImageBuffer preprocess_for_labeling(const ImageBuffer& img,
                                    const std::optional<CameraModel>& cam) {
  ImageBuffer frame = cam ? undistort_image(img, *cam) : img;
  if (frame.width() != kCulaneWidth || frame.height() != kCulaneHeight) {
    frame = resize_bilinear(frame, kCulaneWidth, kCulaneHeight);
  }
  return frame;
}

LabelerTrace detect_lanes(const ImageBuffer& frame,
                          const LabelerProfile& profile) {
  profile.validate();
  LabelerTrace trace;
  trace.frame = frame;
  trace.gray = frame.channels() == 1 ? frame : to_grayscale(frame);
  trace.edges =
      sdct_edge_map(trace.gray, profile.sdct_window, profile.edge_threshold);
  trace.raw_lines = hough_lines(trace.edges, profile);
  std::vector<uint32_t> xs, ys;
  edge_pixels(trace.edges, xs, ys);
  // Centre each line on its edge band, then move from window top-left
  // anchors to window centres.
  const double d = (profile.sdct_window - 1) / 2.0;
  for (const auto& raw : trace.raw_lines) {
    HoughLine line = regrow(xs, ys, raw, profile.sdct_window);
    line.rho += d * (std::cos(line.theta) + std::sin(line.theta));
    trace.lines.push_back(line);
  }
  auto extraction =
      lines_to_lanes(trace.lines, profile, frame.width(), frame.height());
  trace.discarded_horizontal = extraction.discarded_horizontal;
  trace.labels = std::move(extraction.labels);
  return trace;
}

LabelerTrace label_frame(const ImageBuffer& img,
                         const std::optional<CameraModel>& cam,
                         const LabelerProfile& profile) {
  return detect_lanes(preprocess_for_labeling(img, cam), profile);
}

}  // namespace lanewarp
