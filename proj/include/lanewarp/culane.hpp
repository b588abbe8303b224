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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lanewarp/imaging.hpp"
#include "lanewarp/point.hpp"

namespace lanewarp {

inline constexpr uint32_t kCulaneWidth = 1640;
inline constexpr uint32_t kCulaneHeight = 590;
inline constexpr size_t kMaxLanes = 4;

// Lane polyline ordered bottom-of-image first (strictly decreasing y).
class LaneLabel {
 public:
  // Sorts by decreasing y and keeps the first occurrence of a repeated y.
  // Throws kInvalidArgument on non-finite points or fewer than 2 survivors.
  explicit LaneLabel(std::vector<PointF> points);

  // Same normalisation; nullopt instead of throwing on < 2 points.
  static std::optional<LaneLabel> try_make(std::vector<PointF> points);

  const std::vector<PointF>& points() const { return points_; }
  size_t size() const { return points_.size(); }

  // x on the polyline at row y; linear extrapolation past either end.
  double x_at(double y) const;

  friend bool operator==(const LaneLabel&, const LaneLabel&) = default;

 private:
  LaneLabel() = default;
  std::vector<PointF> points_;
};

// At most four lanes, stored left-to-right by x at the lowest common row.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<LaneLabel> lanes,
                    uint32_t frame_w = kCulaneWidth,
                    uint32_t frame_h = kCulaneHeight);

  const std::vector<LaneLabel>& lanes() const { return lanes_; }
  size_t size() const { return lanes_.size(); }
  bool empty() const { return lanes_.empty(); }
  uint32_t frame_w() const { return frame_w_; }
  uint32_t frame_h() const { return frame_h_; }

  // Lane equality only; frame dims are context.
  friend bool operator==(const LabelSet& a, const LabelSet& b) {
    return a.lanes_ == b.lanes_;
  }

 private:
  std::vector<LaneLabel> lanes_;
  uint32_t frame_w_ = kCulaneWidth;
  uint32_t frame_h_ = kCulaneHeight;
};

// CULane "<stem>.lines.txt" grammar: one lane per line, x y pairs.
LabelSet parse_lines_file(std::string_view text,
                          std::vector<std::string>* warnings = nullptr);
std::string write_lines_file(const LabelSet& labels);

// Coordinate token as written to lines files.
std::string format_coordinate(double v);

LabelSet read_lines_file(const std::filesystem::path& path,
                         std::vector<std::string>* warnings = nullptr);

// "<dir>/<stem>.lines.txt" for an image path.
std::filesystem::path lines_path_for(const std::filesystem::path& image_path);

struct FrameRecord {
  std::string image_path;  // relative to the index root, '/' separated
  std::string label_path;  // empty when the frame has no label
  std::array<bool, 4> exist_flags{};

  bool labeled() const { return !label_path.empty(); }
  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct DatasetIndex {
  std::filesystem::path root;
  std::vector<FrameRecord> frames;
  // Paths referenced by a list file that were absent on disk.
  std::vector<std::string> missing;

  friend bool operator==(const DatasetIndex&, const DatasetIndex&) = default;
};

// Split list: "img [label f f f f]" per line. Referenced files that do not
// exist under root are reported in DatasetIndex::missing; the records stay.
DatasetIndex parse_list_file(std::string_view text,
                             const std::filesystem::path& root);
std::string write_list_file(const DatasetIndex& index);

// Recursively finds .jpg/.png images under root, pairing each with its
// sibling lines file when present. Lexicographic order.
DatasetIndex scan_dataset(const std::filesystem::path& root);

// Fills missing label paths from sibling lines files that exist on disk.
DatasetIndex attach_sibling_labels(DatasetIndex index);

// CULane slot flags: up to two lanes either side of the frame centre fill
// slots (1, 0) on the left and (2, 3) on the right.
std::array<bool, 4> exist_flags_for(const LabelSet& labels);

// One warning per labeled frame whose flag count disagrees with its file.
std::vector<std::string> check_exist_flags(const DatasetIndex& index);

// Writes <out_root>/<rel_path> and its sibling lines file. Existing files
// are a kConflict unless overwrite is set.
void write_augmented_frame(const std::filesystem::path& out_root,
                           const std::string& rel_path, const ImageBuffer& img,
                           const LabelSet& labels, bool overwrite);

// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace lanewarp
