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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "lanewarp/imaging.hpp"
#include "lanewarp/prefix_map.hpp"

namespace lanewarp {

struct DiffusionParams {
  size_t max_iters = 2000;
  // Stop once no masked value moves more than this in a sweep.
  double tol = 0.05;

  void validate() const;
};

// Harmonic fill: masked pixels converge to the mean of their in-frame
// 4-neighbours (Gauss-Seidel, sweep direction alternating). Unmasked pixels
// are returned untouched.
ImageBuffer diffusion_inpaint(const ImageBuffer& img, const BinaryMask& mask,
                              const DiffusionParams& params = {});

struct ExternalInpaintOptions {
  // Upper bound on the mean absolute difference over unmasked pixels.
  double max_unmasked_mad = 2.0;
};

// Runs cmd_template with {image}, {mask} and {output} substituted by
// shell-quoted paths, then validates the produced PNG against the input.
ImageBuffer external_inpaint(const std::filesystem::path& image_path,
                             const std::filesystem::path& mask_path,
                             const std::string& cmd_template,
                             const ExternalInpaintOptions& opts = {});

// In-memory variant: stages image and mask as temporary PNGs.
ImageBuffer external_inpaint(const ImageBuffer& img, const BinaryMask& mask,
                             const std::string& cmd_template,
                             const ExternalInpaintOptions& opts = {});

// Mean absolute per-sample difference restricted to pixels where mask is
// false. Returns 0 when every pixel is masked.
double unmasked_mad(const ImageBuffer& a, const ImageBuffer& b,
                    const BinaryMask& mask);

// One hood mask per driving sequence, keyed by relative path prefix.
class MaskRegistry {
 public:
  MaskRegistry() = default;

  // Loads every mask; kConfig if a file is unreadable or, when expected
  // dims are given, its size differs.
  static MaskRegistry load(
      const std::map<std::string, std::filesystem::path>& prefixes,
      std::optional<std::pair<uint32_t, uint32_t>> expected_dims = {});

  void add(std::string prefix, BinaryMask mask);

  // nullptr means "no mask": the frame is not inpainted.
  const BinaryMask* resolve(std::string_view rel_path) const;

  size_t size() const { return masks_.size(); }

 private:
  PrefixMap<std::shared_ptr<const BinaryMask>> masks_;
};

}  // namespace lanewarp
