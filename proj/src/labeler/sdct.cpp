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

#include <cmath>
#include <numbers>
#include <string>

#include "lanewarp/error.hpp"
#include "lanewarp/labeler.hpp"

namespace lanewarp {

namespace {

// basis[k * w + i] = alpha(k) cos((2i + 1) k pi / 2w)
std::vector<double> dct_basis(uint32_t w) {
  std::vector<double> basis(size_t(w) * w);
  for (uint32_t k = 0; k < w; ++k) {
    const double alpha = k == 0 ? std::sqrt(1.0 / w) : std::sqrt(2.0 / w);
    for (uint32_t i = 0; i < w; ++i) {
      basis[k * w + i] =
          alpha * std::cos((2.0 * i + 1.0) * k * std::numbers::pi / (2.0 * w));
    }
  }
  return basis;
}

void check_window(const ImageBuffer& gray, uint32_t w) {
  if (gray.channels() != 1) {
    fail(ErrorKind::kInvalidArgument, "SDCT expects a single-channel image");
  }
  if (w == 0 || w > gray.width() || w > gray.height()) {
    fail(ErrorKind::kInvalidArgument,
         "SDCT window " + std::to_string(w) + " does not fit image " +
             std::to_string(gray.width()) + "x" +
             std::to_string(gray.height()));
  }
}

}  // namespace

std::vector<double> dct2_window(const ImageBuffer& gray, uint32_t x0,
                                uint32_t y0, uint32_t w) {
  check_window(gray, w);
  if (x0 + w > gray.width() || y0 + w > gray.height()) {
    fail(ErrorKind::kInvalidArgument, "DCT window exceeds image");
  }
  const auto basis = dct_basis(w);
  // Columns first: tmp[v][i] = sum_j basis[v][j] f(x0 + i, y0 + j).
  std::vector<double> tmp(size_t(w) * w, 0.0);
  for (uint32_t v = 0; v < w; ++v) {
    for (uint32_t i = 0; i < w; ++i) {
      double s = 0.0;
      for (uint32_t j = 0; j < w; ++j) {
        s += basis[v * w + j] * gray.at(x0 + i, y0 + j);
      }
      tmp[v * w + i] = s;
    }
  }
  std::vector<double> coeffs(size_t(w) * w, 0.0);
  for (uint32_t v = 0; v < w; ++v) {
    for (uint32_t u = 0; u < w; ++u) {
      double s = 0.0;
      for (uint32_t i = 0; i < w; ++i) s += basis[u * w + i] * tmp[v * w + i];
      coeffs[v * w + u] = s;
    }
  }
  return coeffs;
}

double normalized_ac_energy(std::span<const double> coefficients) {
  double total = 0.0;
  for (double c : coefficients) total += c * c;
  if (total <= 0.0) return 0.0;
  const double dc = coefficients[0];
  return (total - dc * dc) / total;
}

BinaryMask sdct_edge_map(const ImageBuffer& gray, uint32_t w,
                         double threshold) {
  check_window(gray, w);
  const uint32_t width = gray.width();
  const uint32_t height = gray.height();
  const uint32_t nx = width - w + 1;
  const uint32_t ny = height - w + 1;
  const auto basis = dct_basis(w);

  // Decision per window anchor, then broadcast to pixels.
  std::vector<uint8_t> window_edge(size_t(nx) * ny, 0);
  std::vector<double> column(size_t(w) * width);  // [v][x]
  std::vector<double> coeffs(size_t(w) * w);
  for (uint32_t y0 = 0; y0 < ny; ++y0) {
    for (uint32_t v = 0; v < w; ++v) {
      const double* b = &basis[v * w];
      double* out = &column[size_t(v) * width];
      for (uint32_t x = 0; x < width; ++x) out[x] = 0.0;
      for (uint32_t j = 0; j < w; ++j) {
        const double bj = b[j];
        const uint8_t* row = gray.samples().data() + size_t(y0 + j) * width;
        for (uint32_t x = 0; x < width; ++x) out[x] += bj * row[x];
      }
    }
    for (uint32_t x0 = 0; x0 < nx; ++x0) {
      for (uint32_t v = 0; v < w; ++v) {
        const double* col = &column[size_t(v) * width + x0];
        for (uint32_t u = 0; u < w; ++u) {
          const double* b = &basis[u * w];
          double s = 0.0;
          for (uint32_t i = 0; i < w; ++i) s += b[i] * col[i];
          coeffs[v * w + u] = s;
        }
      }
      window_edge[size_t(y0) * nx + x0] =
          normalized_ac_energy(coeffs) >= threshold ? 1 : 0;
    }
  }

  BinaryMask mask(width, height);
  for (uint32_t y = 0; y < height; ++y) {
    const uint32_t wy = std::min(y, ny - 1);
    for (uint32_t x = 0; x < width; ++x) {
      const uint32_t wx = std::min(x, nx - 1);
      mask.set(x, y, window_edge[size_t(wy) * nx + wx] != 0);
    }
  }
  return mask;
}

}  // namespace lanewarp
