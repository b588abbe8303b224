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
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lanewarp/culane.hpp"
#include "lanewarp/eval.hpp"
#include "lanewarp/pipeline/config.hpp"
#include "lanewarp/subset.hpp"

namespace lanewarp {

inline constexpr const char* kStatusOk = "ok";
inline constexpr const char* kStatusFailed = "failed";
inline constexpr const char* kStatusSkipped = "skipped";

struct FrameOutcome {
  std::string input;
  std::string output;
  std::string status = kStatusOk;
  // Stage name -> ok | failed | skipped, in execution order.
  std::vector<std::pair<std::string, std::string>> stages;
  size_t lanes_in = 0;
  size_t lanes_out = 0;
  std::string profile;  // labeling runs only
  std::string error;
  std::vector<std::string> notes;
};

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::string tool_version;
  std::string started;
  std::string finished;
  std::vector<FrameOutcome> frames;

  size_t count(const std::string& status) const;
};

Json outcome_to_json(const FrameOutcome& f);
FrameOutcome outcome_from_json(const Json& j);
Json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);
std::string manifest_text(const RunManifest& m);

const char* tool_version();

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// is rethrown after every worker has stopped.
void parallel_for(size_t n, unsigned workers,
                  const std::function<void(size_t)>& fn);

// Exclusive claim on an output tree; a lock left by a dead process is taken
// over. Throws kConflict while another live process holds it.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& root);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

  static std::filesystem::path lock_path(const std::filesystem::path& root);

 private:
  std::filesystem::path path_;
};

// List file from the config (or override) when present, otherwise a scan
// of source_root.
DatasetIndex load_index(const PipelineConfig& cfg,
                        const std::optional<std::filesystem::path>& list = {});

// Output path of an augmented frame: rel with the configured extension.
std::string augmented_rel_path(const std::string& rel, const std::string& fmt);
// Output path of a labeled frame: rel with a .png extension.
std::string labeled_rel_path(const std::string& rel);

inline constexpr const char* kAugmentManifest = "manifest.json";
inline constexpr const char* kAugmentProgress = ".augment.progress.jsonl";
inline constexpr const char* kLabelManifest = "label_manifest.json";
inline constexpr const char* kReviewState = "review_state.json";
inline constexpr const char* kReviewJournal = "review_journal.jsonl";

// Writes selected.txt and selection_report.json under output_root.
SelectionResult run_select(const PipelineConfig& cfg,
                           const DatasetIndex& index);

// Writes frames, labels, list/augmented.txt and manifest.json. Frames whose
// record from an interrupted or earlier run with the same digest says ok are
// carried over unless cfg.overwrite is set.
RunManifest run_augment(const PipelineConfig& cfg, const DatasetIndex& index);

// Writes 1640x590 frames with lines files, review_state.json and
// label_manifest.json. Frames already accepted in review are left alone.
RunManifest run_label(const PipelineConfig& cfg, const DatasetIndex& index);

// Writes eval_report.json and eval_report.txt under output_root.
EvalReport run_eval(const PipelineConfig& cfg,
                    const std::filesystem::path& pred_root,
                    const DatasetIndex& gt_index);

// Review bookkeeping shared by run_label and the review service.
struct ReviewEntry {
  std::string status = "pending";
  std::string source;
  std::string profile;
};
using ReviewState = std::map<std::string, ReviewEntry>;

ReviewState load_review_state(const std::filesystem::path& output_root);
void save_review_state(const std::filesystem::path& output_root,
                       const ReviewState& state);

std::string utc_timestamp();

}  // namespace lanewarp
