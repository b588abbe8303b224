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

#include <random>
#include <set>

#include "doctest.h"
#include "lanewarp/compositor.hpp"
#include "lanewarp/error.hpp"
#include "support/synth.hpp"

using namespace lanewarp;

namespace {

OverlayAsset asset_with(BinaryMask mask, uint8_t body_value, uint32_t feather) {
  OverlayAsset a;
  a.body = ImageBuffer(mask.width(), mask.height(), 3, body_value);
  a.mask = std::move(mask);
  a.feather_radius = feather;
  return a;
}

}  // namespace

TEST_CASE("blend extremes") {
  std::mt19937 rng(3);
  const ImageBuffer base = lwtest::random_image(20, 10, 3, rng);
  CHECK(overlay_blend(base, asset_with(BinaryMask(20, 10), 200, 3)) == base);

  OverlayAsset full = asset_with(BinaryMask(20, 10, true), 0, 0);
  full.body = lwtest::random_image(20, 10, 3, rng);
  CHECK(overlay_blend(base, full) == full.body);
  full.feather_radius = 4;
  CHECK(overlay_blend(base, full) == full.body);
}

TEST_CASE("half mask with a hard edge") {
  BinaryMask mask(10, 4);
  for (uint32_t y = 0; y < 4; ++y)
    for (uint32_t x = 5; x < 10; ++x) mask.set(x, y, true);
  const ImageBuffer base(10, 4, 3, 0);
  const ImageBuffer out = overlay_blend(base, asset_with(mask, 200, 0));
  for (uint32_t y = 0; y < 4; ++y)
    for (uint32_t x = 0; x < 10; ++x)
      for (uint32_t c = 0; c < 3; ++c) CHECK(out.at(x, y, c) == (x < 5 ? 0 : 200));
}

TEST_CASE("feathered alpha") {
  BinaryMask mask(9, 1);
  for (uint32_t x = 4; x < 9; ++x) mask.set(x, 0, true);
  const auto alpha = feathered_alpha(mask, 1);
  CHECK(alpha[2] == 0.0);
  CHECK(alpha[3] == doctest::Approx(1.0 / 3));
  CHECK(alpha[4] == doctest::Approx(2.0 / 3));
  CHECK(alpha[5] == 1.0);
  CHECK(alpha[8] == 1.0);

  const ImageBuffer base(9, 1, 3, 0);
  const ImageBuffer out = overlay_blend(base, asset_with(mask, 210, 1));
  CHECK(out.at(2, 0) == 0);
  CHECK(out.at(3, 0) == 70);
  CHECK(out.at(4, 0) == 140);
  CHECK(out.at(5, 0) == 210);
}

TEST_CASE("feather 0 yields only base or body values and is idempotent") {
  std::mt19937 rng(12);
  const ImageBuffer base(30, 20, 3, 17);
  BinaryMask mask(30, 20);
  for (int k = 0; k < 200; ++k) mask.set(rng() % 30, rng() % 20, true);
  const OverlayAsset a = asset_with(mask, 240, 0);
  const ImageBuffer once = overlay_blend(base, a);
  std::set<uint8_t> values(once.samples().begin(), once.samples().end());
  CHECK(values == std::set<uint8_t>{17, 240});
  CHECK(overlay_blend(once, a) == once);
}

TEST_CASE("blend dimension checks") {
  const OverlayAsset a = asset_with(BinaryMask(8, 8), 1, 0);
  CHECK_THROWS_AS(overlay_blend(ImageBuffer(8, 7, 3), a), Error);
  CHECK_THROWS_AS(overlay_blend(ImageBuffer(8, 8, 1), a), Error);
  OverlayAsset bad = a;
  bad.mask = BinaryMask(7, 8);
  CHECK_THROWS_AS(overlay_blend(ImageBuffer(8, 8, 3), bad), Error);
}

TEST_CASE("occlusion consistency") {
  BinaryMask mask(100, 100);
  for (uint32_t y = 60; y < 100; ++y)
    for (uint32_t x = 0; x < 100; ++x) mask.set(x, y, true);
  const OverlayAsset a = asset_with(mask, 0, 3);

  const LaneLabel lane({PointF{10, 90}, {12, 80}, {14, 70}, {16, 60.2}, {18, 50}, {20, 40}, {22, 30}});
  const LabelSet labels({lane}, 100, 100);

  CHECK(occlusion_consistency(labels, asset_with(BinaryMask(100, 100), 0, 0)) == labels);

  const LabelSet pruned = occlusion_consistency(labels, a);
  REQUIRE(pruned.size() == 1);
  std::vector<PointF> expect;
  for (const auto& p : lane.points()) {
    if (!mask.at(uint32_t(std::lround(p.x)), uint32_t(std::lround(p.y)))) expect.push_back(p);
  }
  CHECK(expect.size() == 3);
  CHECK(pruned.lanes()[0].points() == expect);

  BinaryMask seven(100, 100);
  const LaneLabel seven_pts({PointF{5, 95}, {15, 85}, {25, 75}, {35, 65}, {45, 55}, {55, 45}, {65, 35}});
  for (size_t i : {1, 3, 5}) {
    const auto& p = seven_pts.points()[i];
    seven.set(uint32_t(p.x), uint32_t(p.y), true);
  }
  const LabelSet seven_out =
      occlusion_consistency(LabelSet({seven_pts}, 100, 100), asset_with(seven, 0, 0));
  REQUIRE(seven_out.size() == 1);
  CHECK(seven_out.lanes()[0].size() == 4);

  const LaneLabel hidden({PointF{50, 95}, {50, 70}});
  CHECK(occlusion_consistency(LabelSet({hidden}, 100, 100), a).empty());
}
