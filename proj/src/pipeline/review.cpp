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

#include "lanewarp/pipeline/review.hpp"

#include <fstream>
#include <mutex>
#include <vector>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "lanewarp/error.hpp"
#include "lanewarp/labeler.hpp"
#include "lanewarp/pipeline/digest.hpp"
#include "lanewarp/pipeline/runner.hpp"

namespace lanewarp {

namespace fs = std::filesystem;

std::string labels_digest(const LabelSet& labels) {
  return sha256_hex(write_lines_file(labels));
}

namespace {

Json lanes_to_json(const LabelSet& labels) {
  Json lanes = Json::array();
  for (const auto& lane : labels.lanes()) {
    Json pts = Json::array();
    for (const auto& p : lane.points()) pts.push_back({p.x, p.y});
    lanes.push_back(pts);
  }
  return lanes;
}

LabelSet lanes_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorKind::kValidation, "lanes must be an array");
  std::vector<LaneLabel> lanes;
  for (const auto& lane : j) {
    if (!lane.is_array()) fail(ErrorKind::kValidation, "lane must be an array of points");
    std::vector<PointF> pts;
    for (const auto& p : lane) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        fail(ErrorKind::kValidation, "point must be [x, y]");
      }
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    try {
      lanes.emplace_back(std::move(pts));
    } catch (const Error& e) {
      fail(ErrorKind::kValidation, e.what());
    }
  }
  if (lanes.size() > kMaxLanes) {
    fail(ErrorKind::kValidation, "at most 4 lanes per frame");
  }
  return LabelSet(std::move(lanes), kCulaneWidth, kCulaneHeight);
}

int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConflict:
      return 409;
    case ErrorKind::kIo:
    case ErrorKind::kBackend:
      return 500;
    default:
      return 400;
  }
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}});
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    fail(ErrorKind::kValidation, "request body must be a JSON object");
  }
  return j;
}

}  // namespace

struct ReviewService::Impl {
  PipelineConfig cfg;
  OutputLock lock;
  httplib::Server server;
  std::vector<std::string> keys;
  ReviewState state;
  std::mutex state_mu;
  std::mutex journal_mu;
  std::vector<std::unique_ptr<std::mutex>> frame_mu;

  explicit Impl(const PipelineConfig& c) : cfg(c), lock(c.output_root) {
    std::error_code ec;
    if (!fs::is_regular_file(cfg.output_root / kLabelManifest, ec)) {
      fail(ErrorKind::kConfig, (cfg.output_root / kLabelManifest).string() +
                                   " not found; run 'label' first");
    }
    state = load_review_state(cfg.output_root);
    for (const auto& [key, entry] : state) keys.push_back(key);
    for (size_t i = 0; i < keys.size(); ++i) {
      frame_mu.push_back(std::make_unique<std::mutex>());
    }
    routes();
  }

  fs::path image_path(size_t id) const { return cfg.output_root / keys[id]; }
  fs::path lines_file(size_t id) const { return lines_path_for(image_path(id)); }

  LabelSet current_labels(size_t id) const {
    std::error_code ec;
    if (!fs::is_regular_file(lines_file(id), ec)) return LabelSet();
    return read_lines_file(lines_file(id));
  }

  ReviewEntry entry(size_t id) {
    std::lock_guard g(state_mu);
    return state.at(keys[id]);
  }

  LabelerProfile frame_profile(size_t id) {
    const std::string name = entry(id).profile;
    auto it = cfg.labeler_profiles.find(name);
    return it == cfg.labeler_profiles.end() ? default_profile(cfg) : it->second;
  }

  void journal(Json record) {
    record["timestamp"] = utc_timestamp();
    std::lock_guard g(journal_mu);
    std::ofstream out(cfg.output_root / kReviewJournal, std::ios::app);
    if (!out) fail(ErrorKind::kIo, "cannot append to review journal");
    out << record.dump() << '\n';
  }

  Json frame_labels_json(size_t id) {
    const LabelSet labels = current_labels(id);
    return {{"id", id},
            {"frame", keys[id]},
            {"status", entry(id).status},
            {"lanes", lanes_to_json(labels)},
            {"digest", labels_digest(labels)}};
  }

  // Resolves the {id} capture; sends 404 and returns false when unknown.
  bool frame_id(const httplib::Request& req, httplib::Response& res, size_t& id) {
    try {
      id = std::stoul(req.matches[1].str());
    } catch (const std::exception&) {
      id = keys.size();
    }
    if (id >= keys.size()) {
      send_error(res, 404, "no frame " + req.matches[1].str());
      return false;
    }
    return true;
  }

  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        size_t id = 0;
        if (req.matches.size() > 1 && !frame_id(req, res, id)) return;
        fn(req, res, id);
      } catch (const Error& e) {
        send_error(res, http_status_for(e.kind()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  void routes() {
    server.Get("/api/frames", guarded([this](const auto&, auto& res, size_t) {
      Json frames = Json::array();
      std::lock_guard g(state_mu);
      for (size_t i = 0; i < keys.size(); ++i) {
        const auto& e = state.at(keys[i]);
        frames.push_back({{"id", i},
                          {"frame", keys[i]},
                          {"source", e.source},
                          {"status", e.status},
                          {"profile", e.profile}});
      }
      send_json(res, 200, {{"frames", frames}});
    }));

    server.Get(R"(/api/frames/(\d+)/image)",
               guarded([this](const auto&, auto& res, size_t id) {
                 const auto png = encode_png(load_image(image_path(id)));
                 res.set_content(reinterpret_cast<const char*>(png.data()),
                                 png.size(), "image/png");
               }));

    server.Get(R"(/api/frames/(\d+)/edges)",
               guarded([this](const auto& req, auto& res, size_t id) {
                 Json overrides = Json::object();
                 if (req.has_param("edge_threshold")) {
                   overrides["edge_threshold"] =
                       std::stod(req.get_param_value("edge_threshold"));
                 }
                 if (req.has_param("sdct_window")) {
                   overrides["sdct_window"] =
                       std::stoul(req.get_param_value("sdct_window"));
                 }
                 const LabelerProfile p = profile_from_json(overrides, frame_profile(id));
                 ImageBuffer frame = load_image(image_path(id));
                 if (frame.channels() != 1) frame = to_grayscale(frame);
                 const auto mask = sdct_edge_map(frame, p.sdct_window, p.edge_threshold);
                 const auto png = encode_png(mask.to_image());
                 res.set_content(reinterpret_cast<const char*>(png.data()),
                                 png.size(), "image/png");
               }));

    server.Get(R"(/api/frames/(\d+)/labels)",
               guarded([this](const auto&, auto& res, size_t id) {
                 std::lock_guard g(*frame_mu[id]);
                 send_json(res, 200, frame_labels_json(id));
               }));

    server.Put(R"(/api/frames/(\d+)/labels)",
               guarded([this](const auto& req, auto& res, size_t id) {
                 const Json body = parse_body(req);
                 const LabelSet edited = lanes_from_json(body.value("lanes", Json::array()));
                 std::lock_guard g(*frame_mu[id]);
                 if (entry(id).status == "accepted") {
                   send_error(res, 409, "frame is accepted; set it to pending before editing");
                   return;
                 }
                 const std::string before = labels_digest(current_labels(id));
                 if (body.contains("base_digest") &&
                     body["base_digest"].get<std::string>() != before) {
                   send_json(res, 409, {{"error", "labels changed since base_digest"},
                                        {"digest", before}});
                   return;
                 }
                 write_text_file(lines_file(id), write_lines_file(edited));
                 journal({{"frame", keys[id]},
                          {"action", "edit"},
                          {"before_digest", before},
                          {"after_digest", labels_digest(edited)}});
                 send_json(res, 200, frame_labels_json(id));
               }));

    server.Post(R"(/api/frames/(\d+)/relabel)",
                guarded([this](const auto& req, auto& res, size_t id) {
                  const LabelerProfile p = profile_from_json(parse_body(req), frame_profile(id));
                  const LabelerTrace trace = detect_lanes(load_image(image_path(id)), p);
                  // As they would read back once saved.
                  const LabelSet stored = parse_lines_file(write_lines_file(trace.labels));
                  send_json(res, 200,
                            {{"id", id},
                             {"frame", keys[id]},
                             {"profile", profile_to_json(p)},
                             {"lanes", lanes_to_json(stored)},
                             {"digest", labels_digest(stored)}});
                }));

    server.Post(R"(/api/frames/(\d+)/status)",
                guarded([this](const auto& req, auto& res, size_t id) {
                  const Json body = parse_body(req);
                  const std::string status = body.value("status", std::string());
                  if (status != "accepted" && status != "rejected" && status != "pending") {
                    fail(ErrorKind::kValidation,
                         "status must be accepted, rejected or pending");
                  }
                  std::lock_guard g(*frame_mu[id]);
                  const std::string digest = labels_digest(current_labels(id));
                  std::string before;
                  {
                    std::lock_guard s(state_mu);
                    before = state.at(keys[id]).status;
                    state.at(keys[id]).status = status;
                    save_review_state(cfg.output_root, state);
                  }
                  journal({{"frame", keys[id]},
                           {"action", "status"},
                           {"before_status", before},
                           {"after_status", status},
                           {"before_digest", digest},
                           {"after_digest", digest}});
                  send_json(res, 200, frame_labels_json(id));
                }));

    server.Post("/api/export", guarded([this](const auto&, auto& res, size_t) {
      DatasetIndex index;
      index.root = cfg.output_root;
      std::vector<std::string> accepted;
      {
        std::lock_guard g(state_mu);
        for (const auto& key : keys) {
          if (state.at(key).status == "accepted") accepted.push_back(key);
        }
      }
      for (const auto& key : accepted) {
        FrameRecord rec;
        rec.image_path = key;
        rec.label_path = lines_path_for(key).generic_string();
        std::error_code ec;
        const fs::path lines = cfg.output_root / rec.label_path;
        if (fs::is_regular_file(lines, ec)) {
          rec.exist_flags = exist_flags_for(read_lines_file(lines));
        }
        index.frames.push_back(std::move(rec));
      }
      const fs::path out = cfg.output_root / "list" / "accepted.txt";
      std::error_code ec;
      fs::create_directories(out.parent_path(), ec);
      write_text_file(out, write_list_file(index));
      journal({{"frame", ""}, {"action", "export"}, {"count", accepted.size()}});
      send_json(res, 200, {{"path", "list/accepted.txt"},
                           {"count", accepted.size()},
                           {"frames", accepted}});
    }));

    std::error_code ec;
    if (!cfg.review.static_dir.empty() && fs::is_directory(cfg.review.static_dir, ec)) {
      server.set_mount_point("/", cfg.review.static_dir.string());
    }
  }
};

ReviewService::ReviewService(const PipelineConfig& cfg)
    : impl_(std::make_unique<Impl>(cfg)) {}

ReviewService::~ReviewService() { stop(); }

int ReviewService::bind(const std::string& host, int port) {
  // No SO_REUSEPORT: a second listener on a taken port must fail.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    fail(ErrorKind::kIo, "cannot listen on " + host + ":" + std::to_string(port) +
                             " (address in use?)");
  }
  spdlog::info("review service on http://{}:{}", host, bound);
  return bound;
}

void ReviewService::serve() { impl_->server.listen_after_bind(); }

void ReviewService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void ReviewService::wait_until_ready() const { impl_->server.wait_until_ready(); }

size_t ReviewService::frame_count() const { return impl_->keys.size(); }

}  // namespace lanewarp
