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

#include "lanewarp/inpaint.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "lanewarp/error.hpp"

namespace lanewarp {

namespace fs = std::filesystem;

namespace {

struct MaskedPixel {
  uint32_t x, y;
  size_t index;
};

void check_job(const ImageBuffer& img, const BinaryMask& mask) {
  if (!mask.matches(img)) {
    fail(ErrorKind::kInvalidArgument,
         "mask " + std::to_string(mask.width()) + "x" +
             std::to_string(mask.height()) + " does not match image " +
             std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  if (mask.all()) {
    fail(ErrorKind::kNoContext, "mask covers the whole image");
  }
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

std::string substitute(std::string text, const std::string& key,
                       const std::string& value) {
  size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

// Scoped scratch directory under the system temp path.
class TempDir {
 public:
  TempDir() {
    std::string pattern =
        (fs::temp_directory_path() / "lanewarp-XXXXXX").string();
    if (!mkdtemp(pattern.data())) {
      fail(ErrorKind::kIo, "cannot create temporary directory");
    }
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

void DiffusionParams::validate() const {
  if (max_iters < 1) {
    fail(ErrorKind::kInvalidArgument, "diffusion max_iters must be >= 1");
  }
  if (!(tol > 0)) {
    fail(ErrorKind::kInvalidArgument, "diffusion tol must be > 0");
  }
}

ImageBuffer diffusion_inpaint(const ImageBuffer& img, const BinaryMask& mask,
                              const DiffusionParams& params) {
  params.validate();
  check_job(img, mask);
  const uint32_t w = img.width();
  const uint32_t h = img.height();
  const uint32_t ch = img.channels();

  std::vector<MaskedPixel> masked;
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      if (mask.at(x, y)) masked.push_back({x, y, size_t(y) * w + x});
    }
  }
  ImageBuffer out = img;
  if (masked.empty()) return out;

  // Seed the hole with the mean of its boundary ring.
  std::vector<double> ring_sum(ch, 0.0);
  size_t ring_count = 0;
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      if (mask.at(x, y)) continue;
      const bool touches = (x > 0 && mask.at(x - 1, y)) ||
                           (x + 1 < w && mask.at(x + 1, y)) ||
                           (y > 0 && mask.at(x, y - 1)) ||
                           (y + 1 < h && mask.at(x, y + 1));
      if (!touches) continue;
      for (uint32_t c = 0; c < ch; ++c) ring_sum[c] += img.at(x, y, c);
      ++ring_count;
    }
  }

  std::vector<double> field(size_t(w) * h * ch);
  const auto src = img.samples();
  for (size_t i = 0; i < field.size(); ++i) field[i] = src[i];
  for (const auto& p : masked) {
    for (uint32_t c = 0; c < ch; ++c) {
      field[p.index * ch + c] = ring_sum[c] / double(ring_count);
    }
  }

  auto relax = [&](const MaskedPixel& p) {
    for (uint32_t c = 0; c < ch; ++c) {
      double sum = 0.0;
      int n = 0;
      if (p.x > 0) { sum += field[(p.index - 1) * ch + c]; ++n; }
      if (p.x + 1 < w) { sum += field[(p.index + 1) * ch + c]; ++n; }
      if (p.y > 0) { sum += field[(p.index - w) * ch + c]; ++n; }
      if (p.y + 1 < h) { sum += field[(p.index + w) * ch + c]; ++n; }
      field[p.index * ch + c] = sum / n;
    }
  };

  // One sweep = a forward pass then a backward pass.
  std::vector<double> before(masked.size() * ch);
  for (size_t iter = 0; iter < params.max_iters; ++iter) {
    for (size_t i = 0; i < masked.size(); ++i)
      for (uint32_t c = 0; c < ch; ++c) before[i * ch + c] = field[masked[i].index * ch + c];
    for (auto it = masked.begin(); it != masked.end(); ++it) relax(*it);
    for (auto it = masked.rbegin(); it != masked.rend(); ++it) relax(*it);
    double max_change = 0.0;
    for (size_t i = 0; i < masked.size(); ++i)
      for (uint32_t c = 0; c < ch; ++c)
        max_change = std::max(max_change, std::abs(field[masked[i].index * ch + c] - before[i * ch + c]));
    if (max_change < params.tol) break;
  }

  auto dst = out.samples();
  for (const auto& p : masked) {
    for (uint32_t c = 0; c < ch; ++c) {
      // Quantize to 1e-6 before rounding.
      dst[p.index * ch + c] = to_u8(std::round(field[p.index * ch + c] * 1e6) / 1e6);
    }
  }
  return out;
}

double unmasked_mad(const ImageBuffer& a, const ImageBuffer& b,
                    const BinaryMask& mask) {
  const uint32_t ch = a.channels();
  double sum = 0.0;
  size_t n = 0;
  for (uint32_t y = 0; y < a.height(); ++y) {
    for (uint32_t x = 0; x < a.width(); ++x) {
      if (mask.at(x, y)) continue;
      for (uint32_t c = 0; c < ch; ++c) {
        sum += std::abs(int(a.at(x, y, c)) - int(b.at(x, y, c)));
        ++n;
      }
    }
  }
  return n == 0 ? 0.0 : sum / double(n);
}

ImageBuffer external_inpaint(const fs::path& image_path,
                             const fs::path& mask_path,
                             const std::string& cmd_template,
                             const ExternalInpaintOptions& opts) {
  for (const char* key : {"{image}", "{mask}", "{output}"}) {
    if (cmd_template.find(key) == std::string::npos) {
      fail(ErrorKind::kConfig,
           "inpaint command template lacks placeholder " + std::string(key));
    }
  }
  const ImageBuffer input = load_image(image_path);
  const BinaryMask mask = load_mask(mask_path);
  check_job(input, mask);

  TempDir scratch;
  const fs::path output = scratch.path() / "output.png";
  std::string cmd = substitute(cmd_template, "{image}",
                               shell_quote(fs::absolute(image_path).string()));
  cmd = substitute(cmd, "{mask}", shell_quote(fs::absolute(mask_path).string()));
  cmd = substitute(cmd, "{output}", shell_quote(output.string()));
  cmd += " 2>&1";

  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) fail(ErrorKind::kBackend, "cannot spawn inpaint backend");
  std::string diagnostics;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    // Keep the tail; backends can be chatty.
    diagnostics.append(buf, n);
    if (diagnostics.size() > 16384) diagnostics.erase(0, diagnostics.size() - 16384);
  }
  const int status = pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status)
                                                          : -1;
    fail(ErrorKind::kBackend, "inpaint backend exited with code " +
                                  std::to_string(code) + ": " + diagnostics);
  }
  std::error_code ec;
  if (!fs::exists(output, ec)) {
    fail(ErrorKind::kBackend,
         "inpaint backend produced no output file: " + diagnostics);
  }
  ImageBuffer result;
  try {
    result = load_image(output);
  } catch (const Error& e) {
    fail(ErrorKind::kBackend, std::string("inpaint backend output unreadable: ") +
                                  e.what());
  }
  if (!result.same_shape(input)) {
    fail(ErrorKind::kValidation,
         "inpaint output " + std::to_string(result.width()) + "x" +
             std::to_string(result.height()) + "x" +
             std::to_string(result.channels()) + " does not match input " +
             std::to_string(input.width()) + "x" +
             std::to_string(input.height()) + "x" +
             std::to_string(input.channels()));
  }
  const double mad = unmasked_mad(input, result, mask);
  if (mad > opts.max_unmasked_mad) {
    fail(ErrorKind::kValidation,
         "inpaint backend altered unmasked pixels (mean abs diff " +
             std::to_string(mad) + ")");
  }
  return result;
}

ImageBuffer external_inpaint(const ImageBuffer& img, const BinaryMask& mask,
                             const std::string& cmd_template,
                             const ExternalInpaintOptions& opts) {
  check_job(img, mask);
  TempDir scratch;
  const fs::path image_path = scratch.path() / "image.png";
  const fs::path mask_path = scratch.path() / "mask.png";
  save_image(img, image_path);
  save_mask(mask, mask_path);
  return external_inpaint(image_path, mask_path, cmd_template, opts);
}

MaskRegistry MaskRegistry::load(
    const std::map<std::string, fs::path>& prefixes,
    std::optional<std::pair<uint32_t, uint32_t>> expected_dims) {
  MaskRegistry registry;
  for (const auto& [prefix, path] : prefixes) {
    BinaryMask mask;
    try {
      mask = load_mask(path);
    } catch (const Error& e) {
      fail(ErrorKind::kConfig,
           "mask for sequence '" + prefix + "': " + e.what());
    }
    if (expected_dims && (mask.width() != expected_dims->first ||
                          mask.height() != expected_dims->second)) {
      fail(ErrorKind::kConfig,
           "mask for sequence '" + prefix + "' is " +
               std::to_string(mask.width()) + "x" +
               std::to_string(mask.height()) + ", expected " +
               std::to_string(expected_dims->first) + "x" +
               std::to_string(expected_dims->second));
    }
    registry.add(prefix, std::move(mask));
  }
  return registry;
}

void MaskRegistry::add(std::string prefix, BinaryMask mask) {
  masks_.insert(std::move(prefix),
                std::make_shared<const BinaryMask>(std::move(mask)));
}

const BinaryMask* MaskRegistry::resolve(std::string_view rel_path) const {
  const auto* entry = masks_.resolve(rel_path);
  return entry ? entry->get() : nullptr;
}

}  // namespace lanewarp
