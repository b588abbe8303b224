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

#include <map>
#include <optional>
#include <string>

#include "lanewarp/culane.hpp"

namespace lanewarp {

struct SelectionCriteria {
  RectROI roi = default_selection_roi(kCulaneWidth, kCulaneHeight);
  size_t min_points_in_roi = 3;
  double daylight_luma_min = 60.0;
  std::optional<size_t> sample_limit;

  // Lower-left quadrant: x in [0, W/2), y in [0.55 H, H).
  static RectROI default_selection_roi(uint32_t frame_w, uint32_t frame_h);

  void validate() const;
};

struct SelectionReport {
  size_t kept = 0;
  size_t dark = 0;
  size_t out_of_roi = 0;
  size_t unlabeled = 0;
  size_t unreadable = 0;
  size_t over_limit = 0;
};

struct SelectionResult {
  DatasetIndex selected;
  SelectionReport report;
};

// True iff some lane has at least min_points points strictly inside roi.
bool roi_visibility(const LabelSet& labels, const RectROI& roi,
                    size_t min_points);

// Mean luma over the top 40% of rows.
double daylight_score(const ImageBuffer& img);

// Rejection order per frame: unlabeled, unreadable, dark, out_of_roi.
SelectionResult select_subset(const DatasetIndex& index,
                              const SelectionCriteria& criteria);

}  // namespace lanewarp
