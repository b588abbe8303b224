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

#include <fstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "lanewarp/error.hpp"
#include "lanewarp/pipeline/review.hpp"
#include "lanewarp/pipeline/runner.hpp"
#include "support/fixture.hpp"

using namespace lanewarp;
namespace fs = std::filesystem;

namespace {

struct Served {
  explicit Served(const PipelineConfig& cfg) : svc(cfg) {
    port = svc.bind("127.0.0.1", 0);
    thread = std::thread([this] { svc.serve(); });
    svc.wait_until_ready();
  }
  ~Served() {
    svc.stop();
    thread.join();
  }
  ReviewService svc;
  int port = 0;
  std::thread thread;
};

PipelineConfig labeled_tree(const lwtest::TempDir& dir, int frames) {
  for (int i = 0; i < frames; ++i) {
    save_image(lwtest::contrast_scene(), dir / ("source/seq/" + std::to_string(i) + ".png"));
  }
  const Json doc = {
      {"source_root", "source"},
      {"output_root", "out"},
      {"labeler", {{"profiles", {{"default", {{"accumulator_min", lwtest::kContrastAccumulatorMin}}}}}}}};
  const PipelineConfig cfg = parse_config(doc, dir.path());
  const RunManifest m = run_label(cfg, load_index(cfg));
  REQUIRE(m.count(kStatusOk) == size_t(frames));
  return cfg;
}

Json body_of(const httplib::Result& r) {
  REQUIRE(r);
  return Json::parse(r->body);
}

std::vector<Json> journal_lines(const PipelineConfig& cfg) {
  std::vector<Json> out;
  std::ifstream in(cfg.output_root / kReviewJournal);
  std::string line;
  while (std::getline(in, line)) out.push_back(Json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("review service round trip") {
  lwtest::TempDir dir;
  const PipelineConfig cfg = labeled_tree(dir, 3);
  Served s(cfg);
  CHECK(s.svc.frame_count() == 3);
  httplib::Client cli("127.0.0.1", s.port);

  const Json frames = body_of(cli.Get("/api/frames"))["frames"];
  REQUIRE(frames.size() == 3);
  for (const auto& f : frames) {
    CHECK(f["status"] == "pending");
    CHECK(f["profile"] == "default");
  }
  CHECK(frames[0]["frame"] == "seq/0.png");

  auto image = cli.Get("/api/frames/0/image");
  REQUIRE(image);
  CHECK(image->status == 200);
  CHECK(image->get_header_value("Content-Type") == "image/png");
  CHECK(image->body.substr(1, 3) == "PNG");
  auto edges = cli.Get("/api/frames/0/edges?edge_threshold=0.5");
  REQUIRE(edges);
  CHECK(edges->status == 200);
  CHECK(edges->body.substr(1, 3) == "PNG");
  CHECK(cli.Get("/api/frames/9/labels")->status == 404);
  CHECK(cli.Get("/api/frames/1/edges?sdct_window=6")->status == 400);

  const Json original = body_of(cli.Get("/api/frames/0/labels"));
  REQUIRE(original["lanes"].size() == 1);
  const std::string original_digest = original["digest"];

  // Move one point and save.
  Json lanes = original["lanes"];
  lanes[0][3][0] = lanes[0][3][0].get<double>() + 3.25;
  const Json put = {{"lanes", lanes}, {"base_digest", original_digest}};
  auto saved = cli.Put("/api/frames/0/labels", put.dump(), "application/json");
  REQUIRE(saved);
  CHECK(saved->status == 200);
  const Json after = body_of(cli.Get("/api/frames/0/labels"));
  CHECK(after["lanes"] == Json::parse(saved->body)["lanes"]);
  CHECK(after["digest"] != original_digest);
  const LabelSet on_disk = read_lines_file(cfg.output_root / "seq/0.lines.txt");
  REQUIRE(on_disk.size() == 1);
  for (size_t k = 0; k < on_disk.lanes()[0].size(); ++k) {
    CHECK(std::abs(on_disk.lanes()[0].points()[k].x - lanes[0][k][0].get<double>()) <= 1e-4);
    CHECK(std::abs(on_disk.lanes()[0].points()[k].y - lanes[0][k][1].get<double>()) <= 1e-4);
  }

  // The original digest is now stale.
  auto stale = cli.Put("/api/frames/0/labels", put.dump(), "application/json");
  REQUIRE(stale);
  CHECK(stale->status == 409);
  CHECK(Json::parse(stale->body)["digest"] == after["digest"]);
  const Json bad_lane = {{"lanes", {{{1, 5}, {2, 5}}}}};
  CHECK(cli.Put("/api/frames/0/labels", bad_lane.dump(), "application/json")->status == 400);
  CHECK(cli.Put("/api/frames/0/labels", "[1,", "application/json")->status == 400);

  std::vector<Json> journal = journal_lines(cfg);
  REQUIRE(journal.size() == 1);
  CHECK(journal[0]["action"] == "edit");
  CHECK(journal[0]["frame"] == "seq/0.png");
  CHECK(journal[0]["before_digest"] == original_digest);
  CHECK(journal[0]["after_digest"] == after["digest"]);
  CHECK(journal[0].contains("timestamp"));

  // Re-detect at a lower threshold; the faint lane appears.
  const Json relabel = body_of(cli.Post("/api/frames/1/relabel",
                                        Json{{"edge_threshold", lwtest::kFaintThreshold}}.dump(),
                                        "application/json"));
  CHECK(relabel["lanes"].size() == 2);
  CHECK(relabel["profile"]["edge_threshold"] == lwtest::kFaintThreshold);
  const Json same = body_of(cli.Post("/api/frames/1/relabel", "", "application/json"));
  const Json frame1 = body_of(cli.Get("/api/frames/1/labels"));
  CHECK(same["lanes"] == frame1["lanes"]);
  CHECK(same["digest"] == frame1["digest"]);
  CHECK(cli.Post("/api/frames/1/relabel", Json{{"edge_threshold", 1.5}}.dump(), "application/json")->status == 400);

  // Apply the fresh detection, then undo it by restoring the prior lanes.
  CHECK(cli.Put("/api/frames/1/labels", Json{{"lanes", relabel["lanes"]}}.dump(), "application/json")->status == 200);
  CHECK(body_of(cli.Get("/api/frames/1/labels"))["lanes"].size() == 2);
  CHECK(cli.Put("/api/frames/1/labels", Json{{"lanes", frame1["lanes"]}}.dump(), "application/json")->status == 200);
  CHECK(body_of(cli.Get("/api/frames/1/labels"))["digest"] == frame1["digest"]);

  // Triage and export.
  CHECK(cli.Post("/api/frames/0/status", R"({"status":"accepted"})", "application/json")->status == 200);
  CHECK(cli.Post("/api/frames/2/status", R"({"status":"accepted"})", "application/json")->status == 200);
  CHECK(cli.Post("/api/frames/1/status", R"({"status":"rejected"})", "application/json")->status == 200);
  CHECK(cli.Post("/api/frames/1/status", R"({"status":"done"})", "application/json")->status == 400);
  CHECK(cli.Put("/api/frames/0/labels", Json{{"lanes", Json::array()}}.dump(), "application/json")->status == 409);
  const Json listed = body_of(cli.Get("/api/frames"))["frames"];
  CHECK(listed[0]["status"] == "accepted");
  CHECK(listed[1]["status"] == "rejected");
  CHECK(load_review_state(cfg.output_root).at("seq/2.png").status == "accepted");

  const Json exported = body_of(cli.Post("/api/export", "", "application/json"));
  CHECK(exported["count"] == 2);
  CHECK(exported["frames"] == Json::array({"seq/0.png", "seq/2.png"}));
  const DatasetIndex accepted =
      parse_list_file(read_text_file(cfg.output_root / "list/accepted.txt"), cfg.output_root);
  REQUIRE(accepted.frames.size() == 2);
  CHECK(accepted.frames[0].image_path == "seq/0.png");
  CHECK(accepted.frames[1].image_path == "seq/2.png");
  CHECK(accepted.missing.empty());
  CHECK(read_lines_file(cfg.output_root / accepted.frames[0].label_path) == on_disk);

  journal = journal_lines(cfg);
  CHECK(journal.back()["action"] == "export");
  CHECK(journal[journal.size() - 2]["action"] == "status");
}

TEST_CASE("review service startup errors") {
  lwtest::TempDir dir;
  fs::create_directories(dir / "out");
  const Json doc = {{"source_root", "."}, {"output_root", "out"}};
  try {
    ReviewService svc(parse_config(doc, dir.path()));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }

  const PipelineConfig cfg = labeled_tree(dir, 1);
  httplib::Server other;
  const int taken = other.bind_to_any_port("127.0.0.1");
  REQUIRE(taken > 0);
  ReviewService svc(cfg);
  try {
    svc.bind("127.0.0.1", taken);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
    CHECK(std::string(e.what()).find(std::to_string(taken)) != std::string::npos);
  }
  // The tree stays locked against a second service or a label run.
  try {
    ReviewService second(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConflict);
  }
}
