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

#include "lanewarp/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lanewarp/error.hpp"

namespace lanewarp {

void OverlayAsset::validate() const {
  if (body.width() != mask.width() || body.height() != mask.height()) {
    fail(ErrorKind::kInvalidArgument,
         "overlay body and mask dimensions differ");
  }
}

std::vector<double> feathered_alpha(const BinaryMask& mask, uint32_t radius) {
  const uint32_t w = mask.width();
  const uint32_t h = mask.height();
  std::vector<double> alpha(size_t(w) * h);
  if (radius == 0) {
    for (size_t i = 0; i < alpha.size(); ++i) alpha[i] = mask.bits()[i];
    return alpha;
  }
  // Summed-area table over the 0/1 mask.
  std::vector<uint32_t> sat(size_t(w + 1) * (h + 1), 0);
  for (uint32_t y = 0; y < h; ++y) {
    uint32_t row = 0;
    for (uint32_t x = 0; x < w; ++x) {
      row += mask.at(x, y) ? 1 : 0;
      sat[size_t(y + 1) * (w + 1) + x + 1] = sat[size_t(y) * (w + 1) + x + 1] + row;
    }
  }
  const int r = static_cast<int>(radius);
  for (uint32_t y = 0; y < h; ++y) {
    const uint32_t y0 = static_cast<uint32_t>(std::max(0, int(y) - r));
    const uint32_t y1 = std::min(h, y + radius + 1);
    for (uint32_t x = 0; x < w; ++x) {
      const uint32_t x0 = static_cast<uint32_t>(std::max(0, int(x) - r));
      const uint32_t x1 = std::min(w, x + radius + 1);
      const uint32_t inside = sat[size_t(y1) * (w + 1) + x1] -
                              sat[size_t(y0) * (w + 1) + x1] -
                              sat[size_t(y1) * (w + 1) + x0] +
                              sat[size_t(y0) * (w + 1) + x0];
      const uint32_t area = (x1 - x0) * (y1 - y0);
      alpha[size_t(y) * w + x] =
          inside == area ? 1.0 : double(inside) / double(area);
    }
  }
  return alpha;
}

ImageBuffer overlay_blend(const ImageBuffer& base, const OverlayAsset& asset) {
  asset.validate();
  if (!base.same_shape(asset.body)) {
    fail(ErrorKind::kInvalidArgument,
         "overlay asset " + std::to_string(asset.body.width()) + "x" +
             std::to_string(asset.body.height()) + "x" +
             std::to_string(asset.body.channels()) +
             " does not match frame " + std::to_string(base.width()) + "x" +
             std::to_string(base.height()) + "x" +
             std::to_string(base.channels()));
  }
  const auto alpha = feathered_alpha(asset.mask, asset.feather_radius);
  ImageBuffer out = base;
  const uint32_t ch = base.channels();
  auto dst = out.samples();
  const auto body = asset.body.samples();
  for (size_t i = 0; i < alpha.size(); ++i) {
    const double a = alpha[i];
    if (a == 0.0) continue;
    for (uint32_t c = 0; c < ch; ++c) {
      const size_t k = i * ch + c;
      dst[k] = a == 1.0 ? body[k] : to_u8(a * body[k] + (1.0 - a) * dst[k]);
    }
  }
  return out;
}

LabelSet occlusion_consistency(const LabelSet& labels,
                               const OverlayAsset& asset) {
  const BinaryMask& mask = asset.mask;
  std::vector<LaneLabel> lanes;
  for (const auto& lane : labels.lanes()) {
    std::vector<PointF> visible;
    for (const auto& p : lane.points()) {
      const double px = std::round(p.x);
      const double py = std::round(p.y);
      const bool in_frame = px >= 0 && py >= 0 && px < mask.width() &&
                            py < mask.height();
      if (in_frame &&
          mask.at(static_cast<uint32_t>(px), static_cast<uint32_t>(py))) {
        continue;
      }
      visible.push_back(p);
    }
    if (auto kept = LaneLabel::try_make(std::move(visible))) {
      lanes.push_back(std::move(*kept));
    }
  }
  return LabelSet(std::move(lanes), labels.frame_w(), labels.frame_h());
}

}  // namespace lanewarp
