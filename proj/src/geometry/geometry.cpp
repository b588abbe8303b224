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

#include "lanewarp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lanewarp/error.hpp"

namespace lanewarp {

namespace {

constexpr double kDetEps = 1e-12;
constexpr double kInfinityEps = 1e-9;

std::array<double, 9> multiply(const std::array<double, 9>& a,
                               const std::array<double, 9>& b) {
  std::array<double, 9> r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i * 3 + k] * b[k * 3 + j];
      r[i * 3 + j] = s;
    }
  }
  return r;
}

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

// Similarity taking the points to zero centroid and mean distance sqrt(2).
std::array<double, 9> normalizing_transform(const std::array<PointF, 4>& pts) {
  double mx = 0, my = 0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= 4;
  my /= 4;
  double mean_dist = 0;
  for (const auto& p : pts) mean_dist += std::hypot(p.x - mx, p.y - my);
  mean_dist /= 4;
  const double s = mean_dist > 0 ? std::sqrt(2.0) / mean_dist : 1.0;
  return {s, 0, -s * mx, 0, s, -s * my, 0, 0, 1};
}

PointF apply_raw(const std::array<double, 9>& m, PointF p) {
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  return {(m[0] * p.x + m[1] * p.y + m[2]) / w,
          (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

void check_side(const std::array<PointF, 4>& pts, const char* side) {
  double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
  for (const auto& p : pts) {
    if (!p.finite()) {
      fail(ErrorKind::kDegenerate, std::string(side) + " point is not finite");
    }
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double scale = std::max(max_x - min_x, max_y - min_y);
  const double tol = 1e-6 * scale * scale;
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      for (int c = b + 1; c < 4; ++c) {
        if (!(std::abs(cross(pts[a], pts[b], pts[c])) > tol)) {
          fail(ErrorKind::kDegenerate,
               std::string(side) + " points " + std::to_string(a) + ", " +
                   std::to_string(b) + ", " + std::to_string(c) +
                   " are collinear");
        }
      }
    }
  }
}

}  // namespace

Homography::Homography(const std::array<double, 9>& m) : m_(m) {
  for (double v : m_) {
    if (!std::isfinite(v)) {
      fail(ErrorKind::kDegenerate, "homography has non-finite entries");
    }
  }
  if (std::abs(m_[8]) > kDetEps) {
    const double s = m_[8];
    for (double& v : m_) v /= s;
    m_[8] = 1.0;
  }
  if (!(std::abs(det3(m_)) > kDetEps)) {
    fail(ErrorKind::kDegenerate, "homography is singular");
  }
}

Homography Homography::identity() {
  return Homography({1, 0, 0, 0, 1, 0, 0, 0, 1});
}

Homography Homography::translation(double dx, double dy) {
  return Homography({1, 0, dx, 0, 1, dy, 0, 0, 1});
}

double Homography::determinant() const { return det3(m_); }

void QuadCorrespondence::validate() const {
  check_side(src, "source");
  check_side(dst, "destination");
}

void CameraModel::validate() const {
  if (!(fx > 0) || !(fy > 0)) {
    fail(ErrorKind::kInvalidArgument, "camera focal lengths must be positive");
  }
}

Homography estimate_homography(const QuadCorrespondence& q) {
  q.validate();
  const auto ts = normalizing_transform(q.src);
  const auto td = normalizing_transform(q.dst);

  // Row-major augmented 8x9 system for h = (h0..h7), h8 = 1.
  double a[8][9];
  for (int i = 0; i < 4; ++i) {
    const PointF s = apply_raw(ts, q.src[i]);
    const PointF d = apply_raw(td, q.dst[i]);
    double* r0 = a[2 * i];
    double* r1 = a[2 * i + 1];
    const double row0[9] = {s.x, s.y, 1, 0, 0, 0, -d.x * s.x, -d.x * s.y, d.x};
    const double row1[9] = {0, 0, 0, s.x, s.y, 1, -d.y * s.x, -d.y * s.y, d.y};
    std::copy(row0, row0 + 9, r0);
    std::copy(row1, row1 + 9, r1);
  }

  for (int col = 0; col < 8; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 8; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-10) {
      fail(ErrorKind::kDegenerate,
           "correspondence system is singular at column " +
               std::to_string(col));
    }
    if (pivot != col) std::swap(a[pivot], a[col]);
    for (int r = col + 1; r < 8; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < 9; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::array<double, 9> h{};
  for (int r = 7; r >= 0; --r) {
    double s = a[r][8];
    for (int c = r + 1; c < 8; ++c) s -= a[r][c] * h[c];
    h[r] = s / a[r][r];
  }
  h[8] = 1.0;

  // Undo the conditioning: H = Td^-1 * Hn * Ts.
  const std::array<double, 9> td_inv = {1 / td[0], 0, -td[2] / td[0],
                                        0, 1 / td[4], -td[5] / td[4],
                                        0, 0, 1};
  return Homography(multiply(td_inv, multiply(h, ts)));
}

std::optional<PointF> try_apply_point(const Homography& h, PointF p) {
  const auto& m = h.matrix();
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  if (!(std::abs(w) >= kInfinityEps)) return std::nullopt;
  return PointF{(m[0] * p.x + m[1] * p.y + m[2]) / w,
                (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

PointF apply_point(const Homography& h, PointF p) {
  if (!p.finite()) {
    fail(ErrorKind::kInvalidArgument, "apply_point: point is not finite");
  }
  auto r = try_apply_point(h, p);
  if (!r) {
    fail(ErrorKind::kPointAtInfinity,
         "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
             ") maps to infinity");
  }
  return *r;
}

Homography invert(const Homography& h) {
  const auto& m = h.matrix();
  const double det = h.determinant();
  std::array<double, 9> inv = {
      (m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det,
      (m[1] * m[5] - m[2] * m[4]) / det, (m[5] * m[6] - m[3] * m[8]) / det,
      (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
      (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det,
      (m[0] * m[4] - m[1] * m[3]) / det};
  return Homography(inv);
}

Homography compose(const Homography& outer, const Homography& inner) {
  return Homography(multiply(outer.matrix(), inner.matrix()));
}

ImageBuffer warp_image(const ImageBuffer& img, const Homography& h,
                       uint32_t out_w, uint32_t out_h) {
  if (out_w == 0 || out_h == 0) {
    fail(ErrorKind::kInvalidArgument, "warp output dimensions must be >= 1");
  }
  const Homography inv = invert(h);
  ImageBuffer out(out_w, out_h, img.channels());
  double px[3];
  for (uint32_t y = 0; y < out_h; ++y) {
    for (uint32_t x = 0; x < out_w; ++x) {
      auto src = try_apply_point(inv, {double(x), double(y)});
      if (!src) continue;
      if (!sample_bilinear(img, src->x, src->y, std::span<double>(px, 3))) {
        continue;
      }
      for (uint32_t c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = to_u8(px[c]);
      }
    }
  }
  return out;
}

PointF distort_point(const CameraModel& cam, PointF p) {
  const double u = (p.x - cam.cx) / cam.fx;
  const double v = (p.y - cam.cy) / cam.fy;
  const double r2 = u * u + v * v;
  const double radial = 1 + r2 * (cam.k1 + r2 * (cam.k2 + r2 * cam.k3));
  const double ud = u * radial + 2 * cam.p1 * u * v + cam.p2 * (r2 + 2 * u * u);
  const double vd = v * radial + cam.p1 * (r2 + 2 * v * v) + 2 * cam.p2 * u * v;
  return {cam.fx * ud + cam.cx, cam.fy * vd + cam.cy};
}

ImageBuffer undistort_image(const ImageBuffer& img, const CameraModel& cam) {
  cam.validate();
  ImageBuffer out(img.width(), img.height(), img.channels());
  double px[3];
  for (uint32_t y = 0; y < img.height(); ++y) {
    for (uint32_t x = 0; x < img.width(); ++x) {
      const PointF src = distort_point(cam, {double(x), double(y)});
      if (!sample_bilinear(img, src.x, src.y, std::span<double>(px, 3))) {
        continue;
      }
      for (uint32_t c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = to_u8(px[c]);
      }
    }
  }
  return out;
}

std::optional<LaneLabel> transform_lane(const LaneLabel& lane,
                                        const LaneTransform& t) {
  std::vector<PointF> out;
  out.reserve(lane.size());
  const double lo_x = -t.margin;
  const double lo_y = -t.margin;
  const double hi_x = t.out_w - 1.0 + t.margin;
  const double hi_y = t.out_h - 1.0 + t.margin;
  for (const auto& p : lane.points()) {
    const PointF local{p.x - t.roi.x0, p.y - t.roi.y0};
    auto warped = try_apply_point(t.h, local);
    if (!warped || !warped->finite()) continue;
    // Same pixel-centre convention as resize_bilinear.
    const PointF q{(warped->x + 0.5) * t.scale_x - 0.5,
                   (warped->y + 0.5) * t.scale_y - 0.5};
    if (q.x < lo_x || q.x > hi_x || q.y < lo_y || q.y > hi_y) continue;
    out.push_back(q);
  }
  return LaneLabel::try_make(std::move(out));
}

LabelSet transform_labels(const LabelSet& labels, const LaneTransform& t) {
  std::vector<LaneLabel> lanes;
  for (const auto& lane : labels.lanes()) {
    if (auto moved = transform_lane(lane, t)) lanes.push_back(std::move(*moved));
  }
  return LabelSet(std::move(lanes), t.out_w, t.out_h);
}

}  // namespace lanewarp
