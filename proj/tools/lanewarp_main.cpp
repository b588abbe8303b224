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

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "lanewarp/error.hpp"
#include "lanewarp/pipeline/config.hpp"
#include "lanewarp/pipeline/review.hpp"
#include "lanewarp/pipeline/runner.hpp"

namespace fs = std::filesystem;
using namespace lanewarp;

namespace {

ReviewService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kValidation:
    case ErrorKind::kParse:
    case ErrorKind::kDegenerate:
      return 2;
    default:
      return 1;
  }
}

int report_batch(const RunManifest& m) {
  spdlog::info("{}: {} frame(s), {} ok, {} failed, {} skipped", m.command,
               m.frames.size(), m.count(kStatusOk), m.count(kStatusFailed),
               m.count(kStatusSkipped));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lanewarp: lane dataset viewpoint augmentation and labeling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version()));

  std::string config_path;
  unsigned jobs = 0;
  bool overwrite = false;
  bool verbose = false;
  app.add_option("--config", config_path, "Pipeline config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--jobs", jobs, "Worker threads (overrides parallelism)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--overwrite", overwrite, "Replace existing outputs");
  app.add_flag("--verbose", verbose, "Debug logging");

  std::string list_path;
  auto* select = app.add_subcommand("select", "Pick the daytime, ROI-visible subset");
  select->add_option("--list", list_path, "CULane list file");
  auto* augment = app.add_subcommand("augment", "Warp, inpaint and composite frames");
  augment->add_option("--list", list_path, "CULane list file");
  auto* label = app.add_subcommand("label", "Detect lanes for review");
  label->add_option("--list", list_path, "CULane list file");

  std::string pred_root;
  std::string gt_root;
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--pred", pred_root, "Prediction root")->required();
  eval->add_option("--gt", gt_root, "Ground-truth root (default: source_root)");
  eval->add_option("--list", list_path, "Ground-truth list file");

  std::optional<int> port;
  std::optional<std::string> host;
  auto* review = app.add_subcommand("review", "Serve the label review API");
  review->add_option("--port", port, "Listen port");
  review->add_option("--host", host, "Listen address");

  // CLI11 accepts the global flags on either side of the subcommand.
  for (auto* sub : {select, augment, label, eval, review}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; usage errors exit 2.
    return app.exit(e) == 0 ? 0 : 2;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    PipelineConfig cfg = load_config(config_path);
    if (jobs) cfg.parallelism = jobs;
    if (overwrite) cfg.overwrite = true;
    const std::optional<fs::path> list =
        list_path.empty() ? std::nullopt : std::optional<fs::path>(list_path);

    if (*select) {
      const auto result = run_select(cfg, load_index(cfg, list));
      const auto& r = result.report;
      spdlog::info("select: kept {}, dark {}, out of roi {}, unlabeled {}, "
                   "unreadable {}, over limit {}",
                   r.kept, r.dark, r.out_of_roi, r.unlabeled, r.unreadable,
                   r.over_limit);
      return 0;
    }
    if (*augment) {
      validate_for_augment(cfg);
      return report_batch(run_augment(cfg, load_index(cfg, list)));
    }
    if (*label) {
      validate_for_label(cfg);
      return report_batch(run_label(cfg, load_index(cfg, list)));
    }
    if (*eval) {
      if (!gt_root.empty()) cfg.source_root = fs::absolute(gt_root);
      const auto report = run_eval(cfg, fs::absolute(pred_root), load_index(cfg, list));
      std::cout << report_to_text(report);
      return 0;
    }
    if (*review) {
      ReviewService service(cfg);
      service.bind(host.value_or(cfg.review.host), port.value_or(cfg.review.port));
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.serve();
      g_service = nullptr;
      return 0;
    }
  } catch (const Error& e) {
    spdlog::error("{} error: {}", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
