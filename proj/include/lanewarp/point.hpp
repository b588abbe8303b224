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

#include <cmath>

namespace lanewarp {

// Image-plane position in pixels; sub-pixel and out-of-frame values allowed.
struct PointF {
  double x = 0.0;
  double y = 0.0;

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  friend bool operator==(const PointF&, const PointF&) = default;
};

inline PointF operator-(PointF a, PointF b) { return {a.x - b.x, a.y - b.y}; }
inline PointF operator+(PointF a, PointF b) { return {a.x + b.x, a.y + b.y}; }

inline double cross(PointF a, PointF b, PointF c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline double distance(PointF a, PointF b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace lanewarp
