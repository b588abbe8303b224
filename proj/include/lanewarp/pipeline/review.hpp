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
#include <memory>
#include <string>

#include "lanewarp/pipeline/config.hpp"

namespace lanewarp {

// Local HTTP service over a labeled output tree. Label edits are written
// through to the lines files and appended to review_journal.jsonl.
class ReviewService {
 public:
  // Requires label_manifest.json under cfg.output_root; takes the output
  // lock for the lifetime of the service.
  explicit ReviewService(const PipelineConfig& cfg);
  ~ReviewService();

  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  // Port 0 picks a free port. Throws kIo when the address is unavailable.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  void stop();
  // Returns once serve() accepts connections.
  void wait_until_ready() const;

  size_t frame_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Digest of a label set as stored (SHA-256 of its lines-file text).
std::string labels_digest(const LabelSet& labels);

}  // namespace lanewarp
