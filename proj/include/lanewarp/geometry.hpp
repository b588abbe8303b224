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

#pragma once

#include <array>
#include <optional>

#include "lanewarp/culane.hpp"
#include "lanewarp/imaging.hpp"
#include "lanewarp/point.hpp"

namespace lanewarp {

// Invertible 3x3 projective transform, row-major, scaled so m(2,2) == 1
// whenever |m(2,2)| > 1e-12.
class Homography {
 public:
  // Throws kDegenerate when |det| <= 1e-12.
  explicit Homography(const std::array<double, 9>& m);

  static Homography identity();
  static Homography translation(double dx, double dy);

  double operator()(int row, int col) const { return m_[row * 3 + col]; }
  const std::array<double, 9>& matrix() const { return m_; }
  double determinant() const;

 private:
  std::array<double, 9> m_;
};

// Corner order TL, TR, BR, BL on both sides.
struct QuadCorrespondence {
  std::array<PointF, 4> src;
  std::array<PointF, 4> dst;

  // Throws kDegenerate if any three points on either side are collinear.
  void validate() const;
};

struct CameraModel {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
  double p1 = 0.0, p2 = 0.0;

  void validate() const;
  bool is_identity() const {
    return k1 == 0 && k2 == 0 && k3 == 0 && p1 == 0 && p2 == 0;
  }
};

// Direct linear transform on exactly four correspondences (Hartley
// normalised, 8x8 system, partial pivoting).
Homography estimate_homography(const QuadCorrespondence& q);

// Throws kPointAtInfinity when the homogeneous scale is below 1e-9.
PointF apply_point(const Homography& h, PointF p);
std::optional<PointF> try_apply_point(const Homography& h, PointF p);

Homography invert(const Homography& h);
Homography compose(const Homography& outer, const Homography& inner);

// Inverse-mapped bilinear warp; unmapped pixels are black.
ImageBuffer warp_image(const ImageBuffer& img, const Homography& h,
                       uint32_t out_w, uint32_t out_h);

// Brown-Conrady forward model: undistorted pixel -> distorted pixel.
PointF distort_point(const CameraModel& cam, PointF undistorted);
ImageBuffer undistort_image(const ImageBuffer& img, const CameraModel& cam);

// Parameters the image path uses, replayed on label points. Scaling maps
// pixel centres the way resize_bilinear does: x' = (x + 0.5) * s - 0.5.
struct LaneTransform {
  RectROI roi;
  Homography h = Homography::identity();
  double scale_x = 1.0;
  double scale_y = 1.0;
  uint32_t out_w = kCulaneWidth;
  uint32_t out_h = kCulaneHeight;
  double margin = 50.0;
};

// ROI offset, then H, then scale. Points that go to infinity or land more
// than `margin` outside the output frame are dropped; nullopt when fewer
// than two points survive.
std::optional<LaneLabel> transform_lane(const LaneLabel& lane,
                                        const LaneTransform& t);
LabelSet transform_labels(const LabelSet& labels, const LaneTransform& t);

}  // namespace lanewarp
