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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "lanewarp/culane.hpp"
#include "lanewarp/imaging.hpp"

namespace lwtest {

using namespace lanewarp;

// Dense solve of the discrete Laplace system over the masked pixels of a
// single-channel image (border pixels average their in-frame neighbours).
inline std::vector<double> dense_laplace(const ImageBuffer& img, const BinaryMask& mask) {
  const uint32_t w = img.width(), h = img.height();
  std::vector<int> id(size_t(w) * h, -1);
  int n = 0;
  for (uint32_t y = 0; y < h; ++y)
    for (uint32_t x = 0; x < w; ++x)
      if (mask.at(x, y)) id[size_t(y) * w + x] = n++;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      const int i = id[size_t(y) * w + x];
      if (i < 0) continue;
      const int dx[4] = {-1, 1, 0, 0}, dy[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int nx = int(x) + dx[k], ny = int(y) + dy[k];
        if (nx < 0 || ny < 0 || nx >= int(w) || ny >= int(h)) continue;
        a(i, i) += 1;
        const int j = id[size_t(ny) * w + nx];
        if (j >= 0) {
          a(i, j) -= 1;
        } else {
          b(i) += img.at(nx, ny);
        }
      }
    }
  }
  const Eigen::VectorXd u = a.partialPivLu().solve(b);
  return std::vector<double>(u.data(), u.data() + n);
}

// Direct double sum per coefficient, stored at v * w + u.
inline std::vector<double> brute_dct(const ImageBuffer& gray, uint32_t x0, uint32_t y0,
                                     uint32_t w) {
  const double pi = std::numbers::pi;
  std::vector<double> out(size_t(w) * w);
  for (uint32_t v = 0; v < w; ++v) {
    for (uint32_t u = 0; u < w; ++u) {
      double s = 0;
      for (uint32_t j = 0; j < w; ++j) {
        for (uint32_t i = 0; i < w; ++i) {
          s += gray.at(x0 + i, y0 + j) * std::cos((2 * i + 1) * u * pi / (2.0 * w)) *
               std::cos((2 * j + 1) * v * pi / (2.0 * w));
        }
      }
      const double au = u == 0 ? std::sqrt(1.0 / w) : std::sqrt(2.0 / w);
      const double av = v == 0 ? std::sqrt(1.0 / w) : std::sqrt(2.0 / w);
      out[size_t(v) * w + u] = au * av * s;
    }
  }
  return out;
}

inline BinaryMask brute_edge_map(const ImageBuffer& gray, uint32_t w, double t) {
  BinaryMask m(gray.width(), gray.height());
  for (uint32_t y = 0; y < gray.height(); ++y) {
    for (uint32_t x = 0; x < gray.width(); ++x) {
      const auto c = brute_dct(gray, std::min(x, gray.width() - w),
                               std::min(y, gray.height() - w), w);
      double total = 0;
      for (double v : c) total += v * v;
      const double e = total > 0 ? (total - c[0] * c[0]) / total : 0.0;
      m.set(x, y, e >= t);
    }
  }
  return m;
}

// Digital line x cos(theta) + y sin(theta) = rho, stepped along its major axis.
inline void draw_line(BinaryMask& m, double rho, double theta, double lo = 0,
                      double hi = 1e9) {
  const double c = std::cos(theta), s = std::sin(theta);
  if (std::abs(c) >= std::abs(s)) {
    for (uint32_t y = 0; y < m.height(); ++y) {
      if (y < lo || y > hi) continue;
      const long x = std::lround((rho - y * s) / c);
      if (x >= 0 && x < long(m.width())) m.set(uint32_t(x), y, true);
    }
  } else {
    for (uint32_t x = 0; x < m.width(); ++x) {
      const long y = std::lround((rho - x * c) / s);
      if (y >= 0 && y < long(m.height()) && y >= lo && y <= hi) m.set(x, uint32_t(y), true);
    }
  }
}

struct Assignment {
  size_t count = 0;
  double total = 0;
  std::vector<std::pair<size_t, size_t>> pairs;  // (pred, gt), sorted
};

// Every partial one-to-one matching restricted to pairs at or above the
// threshold; best = most pairs, then highest IoU sum. unique is false when
// another matching ties within 1e-12.
inline Assignment optimal_assignment(const std::vector<std::vector<double>>& iou,
                                     size_t n_gts, double threshold, bool* unique) {
  const size_t np = iou.size();
  Assignment best;
  bool seen = false, tied = false;
  std::vector<int> gt_of(np, -1);
  std::vector<bool> used(n_gts, false);
  auto visit = [&](auto&& self, size_t p, size_t count, double total) -> void {
    if (p == np) {
      const bool better = !seen || count > best.count ||
                          (count == best.count && total > best.total + 1e-12);
      seen = true;
      const bool equal = count == best.count && std::abs(total - best.total) <= 1e-12;
      if (better) {
        best.count = count;
        best.total = total;
        best.pairs.clear();
        for (size_t i = 0; i < np; ++i)
          if (gt_of[i] >= 0) best.pairs.push_back({i, size_t(gt_of[i])});
        tied = false;
      } else if (equal) {
        tied = true;
      }
      return;
    }
    gt_of[p] = -1;
    self(self, p + 1, count, total);
    for (size_t g = 0; g < n_gts; ++g) {
      if (used[g] || iou[p][g] < threshold) continue;
      used[g] = true;
      gt_of[p] = int(g);
      self(self, p + 1, count + 1, total + iou[p][g]);
      gt_of[p] = -1;
      used[g] = false;
    }
  };
  visit(visit, 0, 0, 0.0);
  if (unique) *unique = !tied;
  return best;
}

// Pixels whose centre lies within width / 2 of the polyline.
inline BinaryMask brute_strip(const LaneLabel& lane, uint32_t w, uint32_t h, double width) {
  BinaryMask m(w, h);
  const double r = width / 2;
  const auto& pts = lane.points();
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      double best = INFINITY;
      for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const double ax = pts[k].x, ay = pts[k].y;
        const double dx = pts[k + 1].x - ax, dy = pts[k + 1].y - ay;
        const double t = std::clamp(((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
        best = std::min(best, std::hypot(x - ax - t * dx, y - ay - t * dy));
      }
      if (best <= r) m.set(x, y, true);
    }
  }
  return m;
}

// Known (F1, precision, recall) results for side-view lane models.
struct ScoreRow {
  const char* name;
  double f1, precision, recall;
};

inline const std::vector<ScoreRow>& score_rows() {
  static const std::vector<ScoreRow> rows = {
      {"SCNN pre-trained", 0.2689, 0.6205, 0.1716},
      {"SCNN cropped+aug", 0.2777, 0.9828, 0.1617},
      {"SCNN augmented", 0.6865, 0.8559, 0.5730},
      {"UFLDv2 pre-trained", 0.00119, 0.00268, 0.00076},
      {"UFLDv2 cropped", 0.4884, 0.6344, 0.3971},
      {"UFLDv2 cropped+aug", 0.65074, 0.79873, 0.54902},
  };
  return rows;
}

}  // namespace lwtest
