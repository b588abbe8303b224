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

#include "lanewarp/culane.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lanewarp/error.hpp"

namespace lanewarp {

namespace fs = std::filesystem;

namespace {

std::vector<PointF> normalize_points(std::vector<PointF> points) {
  for (const auto& p : points) {
    if (!p.finite()) {
      fail(ErrorKind::kInvalidArgument, "lane point is not finite");
    }
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const PointF& a, const PointF& b) { return a.y > b.y; });
  auto last = std::unique(points.begin(), points.end(),
                          [](const PointF& a, const PointF& b) {
                            return a.y == b.y;
                          });
  points.erase(last, points.end());
  return points;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  size_t line_no = 0;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    fn(line_no, text.substr(start, end - start));
    start = end + 1;
  }
}

double parse_real(std::string_view token, size_t line_no) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() ||
      !std::isfinite(value)) {
    fail(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                ": non-numeric token '" + std::string(token) +
                                "'");
  }
  return value;
}

std::string normalize_rel(std::string_view raw) {
  while (!raw.empty() && raw.front() == '/') raw.remove_prefix(1);
  return fs::path(raw).lexically_normal().generic_string();
}

bool is_image_ext(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

}  // namespace

LaneLabel::LaneLabel(std::vector<PointF> points)
    : points_(normalize_points(std::move(points))) {
  if (points_.size() < 2) {
    fail(ErrorKind::kInvalidArgument,
         "lane needs at least 2 points with distinct y");
  }
}

std::optional<LaneLabel> LaneLabel::try_make(std::vector<PointF> points) {
  LaneLabel lane;
  lane.points_ = normalize_points(std::move(points));
  if (lane.points_.size() < 2) return std::nullopt;
  return lane;
}

double LaneLabel::x_at(double y) const {
  // points_ is sorted by decreasing y.
  size_t seg = 0;
  if (y <= points_.back().y) {
    seg = points_.size() - 2;
  } else {
    while (seg + 2 < points_.size() && points_[seg + 1].y > y) ++seg;
  }
  const PointF& a = points_[seg];
  const PointF& b = points_[seg + 1];
  const double t = (y - a.y) / (b.y - a.y);
  return a.x + t * (b.x - a.x);
}

LabelSet::LabelSet(std::vector<LaneLabel> lanes, uint32_t frame_w,
                   uint32_t frame_h)
    : lanes_(std::move(lanes)), frame_w_(frame_w), frame_h_(frame_h) {
  if (lanes_.size() > kMaxLanes) {
    fail(ErrorKind::kInvalidArgument,
         "label set holds " + std::to_string(lanes_.size()) +
             " lanes, at most 4 allowed");
  }
  if (lanes_.size() < 2) return;
  double common_y = lanes_.front().points().front().y;
  for (const auto& lane : lanes_) {
    common_y = std::min(common_y, lane.points().front().y);
  }
  std::vector<std::pair<double, size_t>> keys;
  for (size_t i = 0; i < lanes_.size(); ++i) {
    keys.emplace_back(lanes_[i].x_at(common_y), i);
  }
  std::stable_sort(keys.begin(), keys.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<LaneLabel> sorted;
  sorted.reserve(lanes_.size());
  for (const auto& [key, idx] : keys) sorted.push_back(lanes_[idx]);
  lanes_ = std::move(sorted);
}

LabelSet parse_lines_file(std::string_view text,
                          std::vector<std::string>* warnings) {
  std::vector<LaneLabel> lanes;
  for_each_line(text, [&](size_t line_no, std::string_view line) {
    auto tokens = split_ws(line);
    if (tokens.empty()) return;
    if (tokens.size() % 2 != 0) {
      fail(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                  ": odd token count " +
                                  std::to_string(tokens.size()));
    }
    std::vector<PointF> points;
    for (size_t i = 0; i < tokens.size(); i += 2) {
      points.push_back({parse_real(tokens[i], line_no),
                        parse_real(tokens[i + 1], line_no)});
    }
    auto lane = LaneLabel::try_make(std::move(points));
    if (!lane) {
      if (warnings) {
        warnings->push_back("line " + std::to_string(line_no) +
                            ": lane with fewer than 2 points dropped");
      }
      return;
    }
    lanes.push_back(std::move(*lane));
  });
  if (lanes.size() > kMaxLanes) {
    fail(ErrorKind::kParse, "file holds " + std::to_string(lanes.size()) +
                                " lanes, at most 4 allowed");
  }
  return LabelSet(std::move(lanes));
}

std::string format_coordinate(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string write_lines_file(const LabelSet& labels) {
  std::string out;
  for (const auto& lane : labels.lanes()) {
    std::string line;
    std::string prev_y;
    size_t emitted = 0;
    for (const auto& p : lane.points()) {
      std::string y = format_coordinate(p.y);
      if (emitted > 0 && y == prev_y) continue;
      if (emitted > 0) line += ' ';
      line += format_coordinate(p.x);
      line += ' ';
      line += y;
      prev_y = std::move(y);
      ++emitted;
    }
    if (emitted < 2) continue;
    out += line;
    out += '\n';
  }
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::kIo, path.string() + ": read failed");
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, path.string() + ": cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(ErrorKind::kIo, path.string() + ": write failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::kIo, path.string() + ": " + ec.message());
}

LabelSet read_lines_file(const fs::path& path,
                         std::vector<std::string>* warnings) {
  const std::string text = read_text_file(path);
  try {
    return parse_lines_file(text, warnings);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

fs::path lines_path_for(const fs::path& image_path) {
  fs::path p = image_path;
  p.replace_extension(".lines.txt");
  return p;
}

DatasetIndex parse_list_file(std::string_view text, const fs::path& root) {
  DatasetIndex index;
  index.root = root;
  for_each_line(text, [&](size_t line_no, std::string_view line) {
    auto tokens = split_ws(line);
    if (tokens.empty()) return;
    if (tokens.size() != 1 && tokens.size() != 2 && tokens.size() != 6) {
      fail(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                  ": expected 'img [label f f f f]', got " +
                                  std::to_string(tokens.size()) + " tokens");
    }
    FrameRecord rec;
    rec.image_path = normalize_rel(tokens[0]);
    if (tokens.size() >= 2) rec.label_path = normalize_rel(tokens[1]);
    if (tokens.size() == 6) {
      for (size_t k = 0; k < 4; ++k) {
        std::string_view flag = tokens[2 + k];
        if (flag != "0" && flag != "1") {
          fail(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                      ": exist flag '" + std::string(flag) +
                                      "' is not 0 or 1");
        }
        rec.exist_flags[k] = flag == "1";
      }
    }
    std::error_code ec;
    if (!fs::exists(root / rec.image_path, ec)) {
      index.missing.push_back(rec.image_path);
    }
    if (rec.labeled() && !fs::exists(root / rec.label_path, ec)) {
      index.missing.push_back(rec.label_path);
    }
    index.frames.push_back(std::move(rec));
  });
  return index;
}

std::string write_list_file(const DatasetIndex& index) {
  std::string out;
  for (const auto& rec : index.frames) {
    out += '/';
    out += rec.image_path;
    if (rec.labeled()) {
      out += " /";
      out += rec.label_path;
      for (bool f : rec.exist_flags) out += f ? " 1" : " 0";
    }
    out += '\n';
  }
  return out;
}

std::array<bool, 4> exist_flags_for(const LabelSet& labels) {
  std::array<bool, 4> flags{};
  const double centre = labels.frame_w() / 2.0;
  std::vector<const LaneLabel*> left;
  std::vector<const LaneLabel*> right;
  for (const auto& lane : labels.lanes()) {
    (lane.points().front().x < centre ? left : right).push_back(&lane);
  }
  if (left.size() <= 2 && right.size() <= 2) {
    // Lanes are left-to-right, so the last left lane is nearest the centre.
    if (left.size() >= 1) flags[1] = true;
    if (left.size() == 2) flags[0] = true;
    if (right.size() >= 1) flags[2] = true;
    if (right.size() == 2) flags[3] = true;
  } else {
    for (size_t i = 0; i < labels.size(); ++i) flags[i] = true;
  }
  return flags;
}

DatasetIndex scan_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    fail(ErrorKind::kIo, root.string() + ": not a readable directory");
  }
  DatasetIndex index;
  index.root = root;
  std::vector<std::string> images;
  fs::recursive_directory_iterator it(root, ec), end;
  if (ec) fail(ErrorKind::kIo, root.string() + ": " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) fail(ErrorKind::kIo, root.string() + ": " + ec.message());
    if (!it->is_regular_file(ec) || !is_image_ext(it->path())) continue;
    images.push_back(fs::relative(it->path(), root).generic_string());
  }
  std::sort(images.begin(), images.end());
  for (auto& rel : images) {
    FrameRecord rec;
    rec.image_path = rel;
    const std::string label = lines_path_for(rel).generic_string();
    if (fs::exists(root / label, ec)) {
      rec.label_path = label;
      try {
        rec.exist_flags = exist_flags_for(read_lines_file(root / label));
      } catch (const Error&) {
        // Unparseable labels keep all-false flags; consumers re-read them.
      }
    }
    index.frames.push_back(std::move(rec));
  }
  return index;
}

DatasetIndex attach_sibling_labels(DatasetIndex index) {
  std::error_code ec;
  for (auto& rec : index.frames) {
    if (rec.labeled()) continue;
    const std::string label = lines_path_for(rec.image_path).generic_string();
    if (!fs::exists(index.root / label, ec)) continue;
    rec.label_path = label;
    try {
      rec.exist_flags = exist_flags_for(read_lines_file(index.root / label));
    } catch (const Error&) {
    }
  }
  return index;
}

std::vector<std::string> check_exist_flags(const DatasetIndex& index) {
  std::vector<std::string> warnings;
  for (const auto& rec : index.frames) {
    if (!rec.labeled()) continue;
    try {
      const LabelSet labels = read_lines_file(index.root / rec.label_path);
      const auto flagged = std::count(rec.exist_flags.begin(),
                                      rec.exist_flags.end(), true);
      if (static_cast<size_t>(flagged) != labels.size()) {
        warnings.push_back(rec.image_path + ": " + std::to_string(flagged) +
                           " exist flags set but label file has " +
                           std::to_string(labels.size()) + " lanes");
      }
    } catch (const Error& e) {
      warnings.push_back(rec.image_path + ": " + e.what());
    }
  }
  return warnings;
}

void write_augmented_frame(const fs::path& out_root, const std::string& rel_path,
                           const ImageBuffer& img, const LabelSet& labels,
                           bool overwrite) {
  const fs::path rel(rel_path);
  if (!is_image_ext(rel)) {
    fail(ErrorKind::kInvalidArgument,
         rel_path + ": output path needs an image extension");
  }
  const fs::path image_out = out_root / rel;
  const fs::path lines_out = lines_path_for(image_out);
  std::error_code ec;
  if (!overwrite) {
    for (const auto& p : {image_out, lines_out}) {
      if (fs::exists(p, ec)) {
        fail(ErrorKind::kConflict,
             p.string() + ": exists and overwrite is disabled");
      }
    }
  }
  fs::create_directories(image_out.parent_path(), ec);
  if (ec) {
    fail(ErrorKind::kIo, image_out.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = image_out;
  tmp.replace_extension(".tmp" + rel.extension().string());
  save_image(img, tmp);
  fs::rename(tmp, image_out, ec);
  if (ec) fail(ErrorKind::kIo, image_out.string() + ": " + ec.message());
  write_text_file(lines_out, write_lines_file(labels));
}

}  // namespace lanewarp
