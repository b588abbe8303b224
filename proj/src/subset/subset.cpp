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

#include "lanewarp/subset.hpp"

#include <algorithm>
#include <cmath>

#include "lanewarp/error.hpp"

namespace lanewarp {

RectROI SelectionCriteria::default_selection_roi(uint32_t frame_w,
                                                 uint32_t frame_h) {
  const auto y0 = static_cast<uint32_t>(std::floor(0.55 * frame_h));
  return {0, y0, std::max(1u, frame_w / 2), std::max(1u, frame_h - y0)};
}

void SelectionCriteria::validate() const {
  if (min_points_in_roi < 1) {
    fail(ErrorKind::kInvalidArgument, "min_points_in_roi must be >= 1");
  }
  if (!(daylight_luma_min >= 0 && daylight_luma_min <= 255)) {
    fail(ErrorKind::kInvalidArgument, "daylight_luma_min must be in [0, 255]");
  }
  if (roi.width == 0 || roi.height == 0) {
    fail(ErrorKind::kInvalidArgument, "selection ROI must be non-empty");
  }
}

bool roi_visibility(const LabelSet& labels, const RectROI& roi,
                    size_t min_points) {
  const double x0 = roi.x0, y0 = roi.y0;
  const double x1 = x0 + roi.width, y1 = y0 + roi.height;
  for (const auto& lane : labels.lanes()) {
    size_t inside = 0;
    for (const auto& p : lane.points()) {
      if (p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1) ++inside;
    }
    if (inside >= min_points) return true;
  }
  return false;
}

double daylight_score(const ImageBuffer& img) {
  if (img.empty()) {
    fail(ErrorKind::kInvalidArgument, "daylight_score: empty image");
  }
  const ImageBuffer gray = img.channels() == 1 ? img : to_grayscale(img);
  const uint32_t rows =
      std::max(1u, static_cast<uint32_t>(std::floor(0.4 * gray.height())));
  const auto samples = gray.samples();
  const size_t n = size_t(rows) * gray.width();
  uint64_t sum = 0;
  for (size_t i = 0; i < n; ++i) sum += samples[i];
  return double(sum) / double(n);
}

SelectionResult select_subset(const DatasetIndex& index,
                              const SelectionCriteria& criteria) {
  criteria.validate();
  SelectionResult result;
  result.selected.root = index.root;
  auto& report = result.report;
  for (const auto& rec : index.frames) {
    if (!rec.labeled()) {
      ++report.unlabeled;
      continue;
    }
    ImageBuffer img;
    LabelSet labels;
    try {
      img = load_image(index.root / rec.image_path);
      labels = read_lines_file(index.root / rec.label_path);
    } catch (const Error&) {
      ++report.unreadable;
      continue;
    }
    if (daylight_score(img) < criteria.daylight_luma_min) {
      ++report.dark;
      continue;
    }
    if (!roi_visibility(labels, criteria.roi, criteria.min_points_in_roi)) {
      ++report.out_of_roi;
      continue;
    }
    if (criteria.sample_limit &&
        result.selected.frames.size() >= *criteria.sample_limit) {
      ++report.over_limit;
      continue;
    }
    result.selected.frames.push_back(rec);
  }
  report.kept = result.selected.frames.size();
  return result;
}

}  // namespace lanewarp
