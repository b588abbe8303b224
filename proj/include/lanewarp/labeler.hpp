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

#include <numbers>
#include <optional>
#include <vector>

#include "lanewarp/culane.hpp"
#include "lanewarp/geometry.hpp"
#include "lanewarp/imaging.hpp"

namespace lanewarp {

// Tunables a reviewer adjusts per sequence.
struct LabelerProfile {
  uint32_t sdct_window = 8;
  double edge_threshold = 0.15;
  double hough_rho_res = 1.0;
  double hough_theta_res = std::numbers::pi / 360.0;
  // Line angle from vertical; the mirrored branch is searched as well.
  double theta_min = 0.26;
  double theta_max = 1.31;
  uint32_t accumulator_min = 120;
  std::vector<double> anchor_rows = default_anchor_rows();
  double merge_dist = 30.0;

  // 589, 569, ..., 249.
  static std::vector<double> default_anchor_rows();

  void validate() const;
};

// Normal form: x cos(theta) + y sin(theta) = rho.
struct HoughLine {
  double rho = 0.0;
  double theta = 0.0;
  uint32_t votes = 0;

  friend bool operator==(const HoughLine&, const HoughLine&) = default;
};

// Orthonormal 2-D DCT-II of the w x w window with top-left (x0, y0);
// coefficient (u, v) is stored at v * w + u (u horizontal frequency).
std::vector<double> dct2_window(const ImageBuffer& gray, uint32_t x0,
                                uint32_t y0, uint32_t w);

// Sum of squared AC coefficients over the sum of all squared coefficients;
// 0 for an all-zero window.
double normalized_ac_energy(std::span<const double> coefficients);

// Per-pixel edge decision from the window anchored at the pixel (clamped so
// the window stays inside the image).
BinaryMask sdct_edge_map(const ImageBuffer& gray, uint32_t window,
                         double threshold);

// Peaks of the (rho, theta) accumulator, strongest first.
std::vector<HoughLine> hough_lines(const BinaryMask& edges,
                                   const LabelerProfile& profile);

struct LaneExtraction {
  LabelSet labels;
  size_t discarded_horizontal = 0;
};

LaneExtraction lines_to_lanes(const std::vector<HoughLine>& lines,
                              const LabelerProfile& profile, uint32_t width,
                              uint32_t height);

// Intermediate products kept for review.
struct LabelerTrace {
  ImageBuffer frame;  // undistorted, 1640x590, original channel count
  ImageBuffer gray;
  BinaryMask edges;
  std::vector<HoughLine> raw_lines;
  std::vector<HoughLine> lines;  // shifted to window centres
  size_t discarded_horizontal = 0;
  LabelSet labels;
};

// Undistort (when a camera is given) and resize to CULane resolution.
ImageBuffer preprocess_for_labeling(const ImageBuffer& img,
                                    const std::optional<CameraModel>& cam);

// Detection on an already preprocessed frame.
LabelerTrace detect_lanes(const ImageBuffer& frame,
                          const LabelerProfile& profile);

LabelerTrace label_frame(const ImageBuffer& img,
                         const std::optional<CameraModel>& cam,
                         const LabelerProfile& profile);

}  // namespace lanewarp
