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
#include <optional>
#include <string>
#include <utility>

#include "json.hpp"
#include "lanewarp/eval.hpp"
#include "lanewarp/geometry.hpp"
#include "lanewarp/inpaint.hpp"
#include "lanewarp/labeler.hpp"
#include "lanewarp/subset.hpp"

namespace lanewarp {

using Json = nlohmann::json;

struct Size2 {
  uint32_t w = 0;
  uint32_t h = 0;
  friend bool operator==(const Size2&, const Size2&) = default;
};

enum class InpaintBackend { kNone, kBuiltin, kExternal };

struct InpaintSettings {
  InpaintBackend backend = InpaintBackend::kBuiltin;
  std::string command;  // template with {image} {mask} {output}
  DiffusionParams diffusion;
  ExternalInpaintOptions external;
  unsigned pool_size = 0;  // 0: CPU count
};

struct OverlaySettings {
  std::filesystem::path body;
  std::filesystem::path mask;
  uint32_t feather_radius = 3;
  bool prune_labels = true;
};

struct ReviewSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path static_dir;
};

// Resolved run configuration; relative paths are anchored at the config
// file's directory.
struct PipelineConfig {
  std::filesystem::path source_root;
  std::filesystem::path output_root;
  std::optional<std::filesystem::path> list_file;

  std::optional<RectROI> roi;
  std::optional<QuadCorrespondence> warp;
  std::optional<Size2> warp_size;  // defaults to the ROI size
  std::optional<Size2> out_size;
  double label_margin = 50.0;
  std::string output_format = "png";

  std::map<std::string, std::filesystem::path> mask_registry;
  InpaintSettings inpaint;
  std::optional<OverlaySettings> overlay;

  bool overwrite = false;
  unsigned parallelism = 1;

  std::optional<CameraModel> camera;
  std::map<std::string, LabelerProfile> labeler_profiles;
  std::map<std::string, std::string> labeler_sequences;  // prefix -> profile

  SelectionCriteria selection;
  EvalConfig eval;
  ReviewSettings review;
};

// Throws kConfig on malformed documents or unknown keys.
PipelineConfig parse_config(const Json& doc,
                            const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

// Field-wise overrides on top of `base`; same key names as the config file.
LabelerProfile profile_from_json(const Json& j, LabelerProfile base = {});
Json profile_to_json(const LabelerProfile& p);

Json roi_to_json(const RectROI& roi);

// Canonical form of everything that shapes outputs (excludes output_root,
// overwrite, parallelism and review settings).
Json canonical_json(const PipelineConfig& cfg);

// SHA-256 over canonical_json plus the bytes of every referenced mask and
// overlay file.
std::string config_digest(const PipelineConfig& cfg);

// Checks required for an augment run, including file existence.
void validate_for_augment(const PipelineConfig& cfg);
void validate_for_label(const PipelineConfig& cfg);

// "default" if present, otherwise a default-constructed profile.
const LabelerProfile& default_profile(const PipelineConfig& cfg);

}  // namespace lanewarp
