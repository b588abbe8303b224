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

#include <vector>

#include "lanewarp/culane.hpp"
#include "lanewarp/imaging.hpp"

namespace lanewarp {

// Target-vehicle body crop and its region, at pipeline output resolution.
struct OverlayAsset {
  ImageBuffer body;
  BinaryMask mask;
  uint32_t feather_radius = 3;

  void validate() const;
};

// Box-blurred mask in [0, 1]; the window is clipped at the frame border.
std::vector<double> feathered_alpha(const BinaryMask& mask, uint32_t radius);

// out = alpha * body + (1 - alpha) * base, rounded.
ImageBuffer overlay_blend(const ImageBuffer& base, const OverlayAsset& asset);

// Drops label points that land on the (unfeathered) body mask.
LabelSet occlusion_consistency(const LabelSet& labels,
                               const OverlayAsset& asset);

}  // namespace lanewarp
