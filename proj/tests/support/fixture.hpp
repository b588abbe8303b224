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

#include <string>

#include "json.hpp"
#include "support/synth.hpp"

namespace lwtest {

// Source frames of kSrcW x kSrcH, a perspective crop to kOutW x kOutH, a
// hood mask for seqA and a body overlay in the lower right corner.
inline constexpr uint32_t kSrcW = 400, kSrcH = 200;
inline constexpr uint32_t kOutW = 240, kOutH = 96;

inline nlohmann::json augment_config_json() {
  return {
      {"source_root", "source"},
      {"output_root", "out"},
      {"roi", {{"x0", 20}, {"y0", 60}, {"width", 360}, {"height", 140}}},
      {"warp",
       {{"src", {{60, 0}, {300, 0}, {360, 140}, {0, 140}}},
        {"dst", {{0, 0}, {360, 0}, {360, 140}, {0, 140}}}}},
      {"out_size", {kOutW, kOutH}},
      {"mask_registry", {{"seqA", "hood.png"}}},
      {"inpaint", {{"backend", "builtin"}}},
      {"overlay", {{"body", "body.png"}, {"mask", "body_mask.png"}, {"feather_radius", 2}}},
      {"parallelism", 1},
  };
}

// Writes the dataset and assets under dir and the config at dir/config.json.
inline fs::path write_augment_fixture(const fs::path& dir, int frames, unsigned seed = 42,
                                      const nlohmann::json& patch = nlohmann::json::object()) {
  write_scene_dataset(dir / "source", frames, kSrcW, kSrcH, seed);
  BinaryMask hood(kOutW, kOutH);
  for (uint32_t y = kOutH - 10; y < kOutH; ++y)
    for (uint32_t x = 0; x < kOutW; ++x) hood.set(x, y, true);
  save_mask(hood, dir / "hood.png");
  BinaryMask body(kOutW, kOutH);
  ImageBuffer body_img(kOutW, kOutH, 3, 0);
  for (uint32_t y = kOutH - 30; y < kOutH; ++y) {
    for (uint32_t x = kOutW - 50; x < kOutW; ++x) {
      body.set(x, y, true);
      body_img.at(x, y, 0) = 150;
      body_img.at(x, y, 1) = 20;
      body_img.at(x, y, 2) = 30;
    }
  }
  save_mask(body, dir / "body_mask.png");
  save_image(body_img, dir / "body.png");
  nlohmann::json cfg = augment_config_json();
  cfg.merge_patch(patch);
  write_text_file(dir / "config.json", cfg.dump(2));
  return dir / "config.json";
}

// 1640x590 road with one bright lane and one faint lane; the faint one is
// found only below the default edge threshold.
inline LabelSet contrast_lanes() {
  return LabelSet({straight_lane(500, 589, 760, 236), straight_lane(1200, 589, 900, 236)},
                  kCulaneWidth, kCulaneHeight);
}

inline ImageBuffer contrast_scene() {
  const LabelSet lanes = contrast_lanes();
  ImageBuffer img = render_scene(LabelSet({lanes.lanes()[0]}), kCulaneWidth, kCulaneHeight, 3, 4.0);
  paint_lane(img, lanes.lanes()[1], 4.0, 75);
  return img;
}

inline constexpr double kFaintThreshold = 0.004;
// The horizon edge lifts partial-overlap lines above the default vote floor.
inline constexpr uint32_t kContrastAccumulatorMin = 150;

}  // namespace lwtest
