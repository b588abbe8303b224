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

#include "lanewarp/pipeline/runner.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <semaphore>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "lanewarp/compositor.hpp"
#include "lanewarp/error.hpp"
#include "lanewarp/geometry.hpp"
#include "lanewarp/inpaint.hpp"
#include "lanewarp/labeler.hpp"
#include "lanewarp/prefix_map.hpp"

#ifndef LANEWARP_VERSION
#define LANEWARP_VERSION "0.0.0"
#endif

namespace lanewarp {

namespace fs = std::filesystem;

const char* tool_version() { return LANEWARP_VERSION; }

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

size_t RunManifest::count(const std::string& status) const {
  size_t n = 0;
  for (const auto& f : frames) n += f.status == status ? 1 : 0;
  return n;
}

Json outcome_to_json(const FrameOutcome& f) {
  Json stages = Json::array();
  for (const auto& [name, status] : f.stages) {
    stages.push_back({{"stage", name}, {"status", status}});
  }
  Json j = {{"input", f.input},       {"output", f.output},
            {"status", f.status},     {"stages", stages},
            {"lanes_in", f.lanes_in}, {"lanes_out", f.lanes_out},
            {"error", f.error},       {"notes", f.notes}};
  if (!f.profile.empty()) j["profile"] = f.profile;
  return j;
}

FrameOutcome outcome_from_json(const Json& j) {
  FrameOutcome f;
  f.input = j.at("input").get<std::string>();
  f.output = j.at("output").get<std::string>();
  f.status = j.at("status").get<std::string>();
  for (const auto& s : j.at("stages")) {
    f.stages.emplace_back(s.at("stage").get<std::string>(),
                          s.at("status").get<std::string>());
  }
  f.lanes_in = j.at("lanes_in").get<size_t>();
  f.lanes_out = j.at("lanes_out").get<size_t>();
  f.profile = j.value("profile", std::string());
  f.error = j.value("error", std::string());
  f.notes = j.value("notes", std::vector<std::string>{});
  return f;
}

Json manifest_to_json(const RunManifest& m) {
  Json frames = Json::array();
  for (const auto& f : m.frames) frames.push_back(outcome_to_json(f));
  return {{"command", m.command},
          {"config_digest", m.config_digest},
          {"tool_version", m.tool_version},
          {"started", m.started},
          {"finished", m.finished},
          {"summary",
           {{"frames", m.frames.size()},
            {"ok", m.count(kStatusOk)},
            {"failed", m.count(kStatusFailed)},
            {"skipped", m.count(kStatusSkipped)}}},
          {"frames", frames}};
}

RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.started = j.value("started", std::string());
    m.finished = j.value("finished", std::string());
    for (const auto& f : j.at("frames")) m.frames.push_back(outcome_from_json(f));
  } catch (const Json::exception& e) {
    fail(ErrorKind::kParse, std::string("manifest: ") + e.what());
  }
  return m;
}

std::string manifest_text(const RunManifest& m) {
  return manifest_to_json(m).dump(2) + "\n";
}

void parallel_for(size_t n, unsigned workers,
                  const std::function<void(size_t)>& fn) {
  const size_t threads = std::min<size_t>(std::max(1u, workers), n);
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first;
  std::mutex mu;
  auto body = [&] {
    for (;;) {
      if (stop.load()) return;
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t t = 0; t < threads; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

fs::path OutputLock::lock_path(const fs::path& root) {
  return root / ".lanewarp.lock";
}

OutputLock::OutputLock(const fs::path& root) : path_(lock_path(root)) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) fail(ErrorKind::kIo, root.string() + ": " + ec.message());
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      const std::string pid = std::to_string(::getpid()) + "\n";
      const ssize_t written = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      if (written != static_cast<ssize_t>(pid.size())) {
        fs::remove(path_, ec);
        fail(ErrorKind::kIo, path_.string() + ": cannot write lock");
      }
      return;
    }
    if (errno != EEXIST) {
      fail(ErrorKind::kIo, path_.string() + ": " + std::strerror(errno));
    }
    long owner = 0;
    std::ifstream(path_) >> owner;
    const bool alive =
        owner > 0 && (::kill(static_cast<pid_t>(owner), 0) == 0 || errno == EPERM);
    if (alive) {
      fail(ErrorKind::kConflict, root.string() + " is in use by process " +
                                     std::to_string(owner));
    }
    spdlog::warn("removing stale lock {} (pid {})", path_.string(), owner);
    fs::remove(path_, ec);
  }
  fail(ErrorKind::kConflict, path_.string() + ": could not acquire lock");
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

DatasetIndex load_index(const PipelineConfig& cfg,
                        const std::optional<fs::path>& list) {
  const auto list_file = list ? list : cfg.list_file;
  DatasetIndex index;
  if (list_file) {
    index = attach_sibling_labels(
        parse_list_file(read_text_file(*list_file), cfg.source_root));
  } else {
    index = scan_dataset(cfg.source_root);
  }
  for (const auto& m : index.missing) spdlog::warn("listed file missing: {}", m);
  for (const auto& w : check_exist_flags(index)) spdlog::warn("{}", w);
  return index;
}

std::string augmented_rel_path(const std::string& rel, const std::string& fmt) {
  fs::path p(rel);
  p.replace_extension("." + fmt);
  return p.generic_string();
}

std::string labeled_rel_path(const std::string& rel) {
  return augmented_rel_path(rel, "png");
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, dir.string() + ": " + ec.message());
}

// Tracks the stage currently executing.
class StageLog {
 public:
  explicit StageLog(FrameOutcome& out) : out_(out) {}
  void begin(const char* name) { current_ = name; }
  void done() { out_.stages.emplace_back(current_, kStatusOk); }
  void skipped(const char* name, const std::string& note) {
    out_.stages.emplace_back(name, kStatusSkipped);
    if (!note.empty()) out_.notes.push_back(note);
  }
  void failed(const std::string& what) {
    out_.stages.emplace_back(current_, kStatusFailed);
    out_.status = kStatusFailed;
    out_.error = current_ + ": " + what;
  }

 private:
  FrameOutcome& out_;
  std::string current_ = "load";
};

struct AugmentPlan {
  Homography h = Homography::identity();
  RectROI roi;
  Size2 warp_size;
  Size2 out_size;
  MaskRegistry masks;
  std::optional<OverlayAsset> overlay;
  LaneTransform lane_transform;
};

AugmentPlan plan_augment(const PipelineConfig& cfg) {
  validate_for_augment(cfg);
  AugmentPlan plan;
  plan.roi = *cfg.roi;
  plan.warp_size = cfg.warp_size.value_or(Size2{plan.roi.width, plan.roi.height});
  plan.out_size = *cfg.out_size;
  try {
    plan.h = estimate_homography(*cfg.warp);
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, std::string("warp: ") + e.what());
  }
  plan.masks = MaskRegistry::load(
      cfg.mask_registry, std::make_pair(plan.out_size.w, plan.out_size.h));
  if (cfg.overlay) {
    OverlayAsset asset;
    try {
      asset.body = load_image(cfg.overlay->body);
      asset.mask = load_mask(cfg.overlay->mask);
      asset.feather_radius = cfg.overlay->feather_radius;
      asset.validate();
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, std::string("overlay: ") + e.what());
    }
    if (asset.body.width() != plan.out_size.w ||
        asset.body.height() != plan.out_size.h) {
      fail(ErrorKind::kConfig, "overlay: asset size differs from out_size");
    }
    plan.overlay = std::move(asset);
  }
  auto& t = plan.lane_transform;
  t.roi = plan.roi;
  t.h = plan.h;
  t.scale_x = double(plan.out_size.w) / plan.warp_size.w;
  t.scale_y = double(plan.out_size.h) / plan.warp_size.h;
  t.out_w = plan.out_size.w;
  t.out_h = plan.out_size.h;
  t.margin = cfg.label_margin;
  return plan;
}

FrameOutcome augment_frame(const PipelineConfig& cfg, const AugmentPlan& plan,
                           bool overwrite, const FrameRecord& rec,
                           std::counting_semaphore<>& backend_slots) {
  FrameOutcome out;
  out.input = rec.image_path;
  out.output = augmented_rel_path(rec.image_path, cfg.output_format);
  StageLog log(out);
  try {
    log.begin("load");
    if (!rec.labeled()) fail(ErrorKind::kValidation, "frame has no label file");
    ImageBuffer img = load_image(cfg.source_root / rec.image_path);
    const LabelSet source = read_lines_file(cfg.source_root / rec.label_path);
    const LabelSet labels(source.lanes(), img.width(), img.height());
    out.lanes_in = labels.size();
    log.done();

    log.begin("crop");
    plan.roi.check_fits(img.width(), img.height());
    img = crop(img, plan.roi);
    log.done();

    log.begin("warp");
    img = warp_image(img, plan.h, plan.warp_size.w, plan.warp_size.h);
    log.done();

    log.begin("resize");
    img = resize_bilinear(img, plan.out_size.w, plan.out_size.h);
    log.done();

    const BinaryMask* mask = plan.masks.resolve(rec.image_path);
    if (cfg.inpaint.backend == InpaintBackend::kNone) {
      log.skipped("inpaint", "");
    } else if (mask == nullptr) {
      log.skipped("inpaint", "no hood mask registered for this sequence");
    } else {
      log.begin("inpaint");
      if (cfg.inpaint.backend == InpaintBackend::kBuiltin) {
        img = diffusion_inpaint(img, *mask, cfg.inpaint.diffusion);
      } else {
        backend_slots.acquire();
        try {
          img = external_inpaint(img, *mask, cfg.inpaint.command,
                                 cfg.inpaint.external);
        } catch (...) {
          backend_slots.release();
          throw;
        }
        backend_slots.release();
      }
      log.done();
    }

    if (plan.overlay) {
      log.begin("overlay");
      img = overlay_blend(img, *plan.overlay);
      log.done();
    } else {
      log.skipped("overlay", "");
    }

    log.begin("labels");
    LabelSet moved = transform_labels(labels, plan.lane_transform);
    if (plan.overlay && cfg.overlay->prune_labels) {
      moved = occlusion_consistency(moved, *plan.overlay);
    }
    out.lanes_out = moved.size();
    if (out.lanes_out < out.lanes_in) {
      out.notes.push_back(std::to_string(out.lanes_in - out.lanes_out) +
                          " lane(s) left the output frame");
    }
    log.done();

    log.begin("write");
    write_augmented_frame(cfg.output_root, out.output, img, moved, overwrite);
    log.done();
  } catch (const Error& e) {
    log.failed(e.what());
  } catch (const std::exception& e) {
    log.failed(e.what());
  }
  return out;
}

// Records of earlier attempts with the same digest, keyed by input path.
std::map<std::string, FrameOutcome> resumable_records(const fs::path& root,
                                                      const std::string& digest) {
  std::map<std::string, FrameOutcome> records;
  std::error_code ec;
  const fs::path manifest = root / kAugmentManifest;
  if (fs::is_regular_file(manifest, ec)) {
    try {
      const RunManifest m = manifest_from_json(Json::parse(read_text_file(manifest)));
      if (m.command == "augment" && m.config_digest == digest) {
        for (const auto& f : m.frames) records[f.input] = f;
      }
    } catch (const std::exception& e) {
      spdlog::warn("ignoring unreadable manifest {}: {}", manifest.string(),
                   e.what());
    }
  }
  const fs::path progress = root / kAugmentProgress;
  if (fs::is_regular_file(progress, ec)) {
    std::istringstream lines(read_text_file(progress));
    std::string line;
    while (std::getline(lines, line)) {
      // A torn final line from a killed run is dropped.
      const Json j = Json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || j.value("digest", "") != digest) {
        continue;
      }
      try {
        FrameOutcome f = outcome_from_json(j.at("record"));
        records[f.input] = std::move(f);
      } catch (const Json::exception&) {
      }
    }
  }
  return records;
}

bool outputs_present(const fs::path& root, const FrameOutcome& f) {
  std::error_code ec;
  const fs::path img = root / f.output;
  return fs::is_regular_file(img, ec) && fs::is_regular_file(lines_path_for(img), ec);
}

}  // namespace

SelectionResult run_select(const PipelineConfig& cfg, const DatasetIndex& index) {
  if (cfg.output_root.empty()) fail(ErrorKind::kConfig, "output_root is required");
  SelectionResult result = select_subset(index, cfg.selection);
  ensure_dir(cfg.output_root);
  write_text_file(cfg.output_root / "selected.txt", write_list_file(result.selected));
  const auto& r = result.report;
  const Json report = {{"config_digest", config_digest(cfg)},
                       {"frames", index.frames.size()},
                       {"kept", r.kept},
                       {"unlabeled", r.unlabeled},
                       {"unreadable", r.unreadable},
                       {"dark", r.dark},
                       {"out_of_roi", r.out_of_roi},
                       {"over_limit", r.over_limit}};
  write_text_file(cfg.output_root / "selection_report.json", report.dump(2) + "\n");
  return result;
}

RunManifest run_augment(const PipelineConfig& cfg, const DatasetIndex& index) {
  const AugmentPlan plan = plan_augment(cfg);
  RunManifest manifest;
  manifest.command = "augment";
  manifest.config_digest = config_digest(cfg);
  manifest.tool_version = tool_version();
  manifest.started = utc_timestamp();
  ensure_dir(cfg.output_root);

  std::map<std::string, FrameOutcome> previous;
  if (!cfg.overwrite) previous = resumable_records(cfg.output_root, manifest.config_digest);
  // Outputs in a tree last written under this digest may be replaced.
  const bool overwrite = cfg.overwrite || !previous.empty();

  const fs::path progress_path = cfg.output_root / kAugmentProgress;
  std::ofstream progress(progress_path, std::ios::app);
  if (!progress) fail(ErrorKind::kIo, progress_path.string() + ": cannot open");
  std::mutex progress_mu;

  const unsigned slots =
      cfg.inpaint.pool_size ? cfg.inpaint.pool_size
                            : std::max(1u, std::thread::hardware_concurrency());
  std::counting_semaphore<> backend_slots(slots);

  std::vector<FrameOutcome> outcomes(index.frames.size());
  std::atomic<size_t> resumed{0};
  parallel_for(index.frames.size(), cfg.parallelism, [&](size_t i) {
    const FrameRecord& rec = index.frames[i];
    auto it = previous.find(rec.image_path);
    if (it != previous.end() && it->second.status == kStatusOk &&
        outputs_present(cfg.output_root, it->second)) {
      outcomes[i] = it->second;
      ++resumed;
      return;
    }
    outcomes[i] = augment_frame(cfg, plan, overwrite, rec, backend_slots);
    if (outcomes[i].status == kStatusFailed) {
      spdlog::warn("{}: {}", rec.image_path, outcomes[i].error);
    } else {
      spdlog::debug("{}: ok", rec.image_path);
    }
    const Json line = {{"digest", manifest.config_digest},
                       {"record", outcome_to_json(outcomes[i])}};
    std::lock_guard lock(progress_mu);
    progress << line.dump() << '\n' << std::flush;
  });
  progress.close();
  if (resumed) spdlog::info("resumed {} completed frame(s)", resumed.load());

  manifest.frames = std::move(outcomes);
  DatasetIndex list;
  list.root = cfg.output_root;
  for (const auto& f : manifest.frames) {
    if (f.status != kStatusOk) continue;
    FrameRecord rec;
    rec.image_path = f.output;
    rec.label_path = lines_path_for(f.output).generic_string();
    rec.exist_flags = exist_flags_for(read_lines_file(cfg.output_root / rec.label_path));
    list.frames.push_back(std::move(rec));
  }
  ensure_dir(cfg.output_root / "list");
  write_text_file(cfg.output_root / "list" / "augmented.txt", write_list_file(list));

  manifest.finished = utc_timestamp();
  write_text_file(cfg.output_root / kAugmentManifest, manifest_text(manifest));
  std::error_code ec;
  fs::remove(progress_path, ec);
  return manifest;
}

ReviewState load_review_state(const fs::path& output_root) {
  ReviewState state;
  const fs::path path = output_root / kReviewState;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return state;
  try {
    const Json j = Json::parse(read_text_file(path));
    for (const auto& [key, v] : j.at("frames").items()) {
      state[key] = {v.at("status").get<std::string>(),
                    v.value("source", std::string()),
                    v.value("profile", std::string())};
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  return state;
}

void save_review_state(const fs::path& output_root, const ReviewState& state) {
  Json frames = Json::object();
  for (const auto& [key, e] : state) {
    frames[key] = {{"status", e.status}, {"source", e.source}, {"profile", e.profile}};
  }
  write_text_file(output_root / kReviewState, Json{{"frames", frames}}.dump(2) + "\n");
}

RunManifest run_label(const PipelineConfig& cfg, const DatasetIndex& index) {
  validate_for_label(cfg);
  OutputLock lock(cfg.output_root);
  RunManifest manifest;
  manifest.command = "label";
  manifest.config_digest = config_digest(cfg);
  manifest.tool_version = tool_version();
  manifest.started = utc_timestamp();

  PrefixMap<std::string> sequences;
  for (const auto& [prefix, name] : cfg.labeler_sequences) sequences.insert(prefix, name);
  ReviewState state = load_review_state(cfg.output_root);

  std::vector<FrameOutcome> outcomes(index.frames.size());
  parallel_for(index.frames.size(), cfg.parallelism, [&](size_t i) {
    const FrameRecord& rec = index.frames[i];
    FrameOutcome& out = outcomes[i];
    out.input = rec.image_path;
    out.output = labeled_rel_path(rec.image_path);
    const std::string* name = sequences.resolve(rec.image_path);
    const LabelerProfile& profile =
        name ? cfg.labeler_profiles.at(*name) : default_profile(cfg);
    out.profile = name ? *name : "default";
    if (!name) out.notes.push_back("no sequence profile matched; default profile used");

    auto prior = state.find(out.output);
    if (prior != state.end() && prior->second.status == "accepted") {
      out.status = kStatusSkipped;
      out.profile = prior->second.profile;
      out.notes.push_back("accepted in review; left unchanged");
      return;
    }
    StageLog log(out);
    try {
      log.begin("load");
      const ImageBuffer img = load_image(cfg.source_root / rec.image_path);
      log.done();
      log.begin("label");
      const LabelerTrace trace = label_frame(img, cfg.camera, profile);
      out.lanes_out = trace.labels.size();
      if (trace.discarded_horizontal) {
        out.notes.push_back(std::to_string(trace.discarded_horizontal) +
                            " near-horizontal line(s) discarded");
      }
      log.done();
      log.begin("write");
      write_augmented_frame(cfg.output_root, out.output, trace.frame,
                            trace.labels, true);
      log.done();
    } catch (const std::exception& e) {
      log.failed(e.what());
      spdlog::warn("{}: {}", rec.image_path, out.error);
    }
  });

  for (const auto& out : outcomes) {
    if (out.status == kStatusOk) {
      state[out.output] = {"pending", out.input, out.profile};
    }
  }
  save_review_state(cfg.output_root, state);
  manifest.frames = std::move(outcomes);
  manifest.finished = utc_timestamp();
  write_text_file(cfg.output_root / kLabelManifest, manifest_text(manifest));
  return manifest;
}

EvalReport run_eval(const PipelineConfig& cfg, const fs::path& pred_root,
                    const DatasetIndex& gt_index) {
  cfg.eval.validate();
  std::error_code ec;
  if (!fs::is_directory(pred_root, ec)) {
    fail(ErrorKind::kIo, pred_root.string() + ": prediction root does not exist");
  }
  if (cfg.output_root.empty()) fail(ErrorKind::kConfig, "output_root is required");
  EvalReport report = evaluate_dataset(pred_root, gt_index, cfg.eval);
  for (const auto& w : report.warnings) spdlog::warn("{}", w);
  ensure_dir(cfg.output_root);
  write_text_file(cfg.output_root / "eval_report.json", report_to_json(report));
  write_text_file(cfg.output_root / "eval_report.txt", report_to_text(report));
  return report;
}

}  // namespace lanewarp
