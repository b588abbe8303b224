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

#include <filesystem>
#include <string>
#include <vector>

#include "lanewarp/culane.hpp"
#include "lanewarp/imaging.hpp"

namespace lanewarp {

struct EvalConfig {
  uint32_t strip_width = 30;
  double iou_threshold = 0.5;
  uint32_t frame_w = kCulaneWidth;
  uint32_t frame_h = kCulaneHeight;

  void validate() const;
};

struct FrameScore {
  std::string frame;
  size_t tp = 0, fp = 0, fn = 0;
};

struct EvalReport {
  size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::vector<FrameScore> per_frame;
  std::vector<std::string> warnings;
};

struct Scores {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// Harmonic mean; 0 when p + r == 0.
double f1_score(double precision, double recall);
// Each ratio is 0 when its denominator is 0.
Scores scores_from_counts(size_t tp, size_t fp, size_t fn);

// Polyline drawn as a strip of width strip_width: a disc of that diameter
// stamped every <= 0.5 px along each segment, clipped to the frame.
BinaryMask rasterize_lane(const LaneLabel& lane, const EvalConfig& cfg);

double lane_iou(const BinaryMask& a, const BinaryMask& b);

struct LanePair {
  size_t pred = 0;
  size_t gt = 0;
  double iou = 0.0;
};

struct MatchResult {
  size_t tp = 0, fp = 0, fn = 0;
  std::vector<LanePair> pairs;
};

// Full IoU matrix between two lane sets.
std::vector<std::vector<double>> iou_matrix(const LabelSet& preds,
                                            const LabelSet& gts,
                                            const EvalConfig& cfg);

// Greedy one-to-one matching on a precomputed IoU matrix (rows = preds):
// repeatedly take the highest IoU >= threshold, ties by (pred, gt).
MatchResult match_from_matrix(const std::vector<std::vector<double>>& iou,
                              size_t n_gts, double threshold);

MatchResult match_lanes(const LabelSet& preds, const LabelSet& gts,
                        const EvalConfig& cfg);

// Predictions live at <pred_root>/<image stem>.lines.txt, mirroring the
// ground-truth layout. Missing or unreadable files score as empty.
EvalReport evaluate_dataset(const std::filesystem::path& pred_root,
                            const DatasetIndex& gt_index,
                            const EvalConfig& cfg);

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

}  // namespace lanewarp
