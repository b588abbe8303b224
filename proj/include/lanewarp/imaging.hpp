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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lanewarp {

// 8-bit raster, row-major, interleaved. Three-channel images are R,G,B.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(uint32_t width, uint32_t height, uint32_t channels,
              uint8_t fill = 0);
  ImageBuffer(uint32_t width, uint32_t height, uint32_t channels,
              std::vector<uint8_t> samples);

  uint32_t width() const { return width_; }
  uint32_t height() const { return height_; }
  uint32_t channels() const { return channels_; }
  bool empty() const { return samples_.empty(); }

  uint8_t at(uint32_t x, uint32_t y, uint32_t c = 0) const {
    return samples_[(size_t(y) * width_ + x) * channels_ + c];
  }
  uint8_t& at(uint32_t x, uint32_t y, uint32_t c = 0) {
    return samples_[(size_t(y) * width_ + x) * channels_ + c];
  }

  std::span<const uint8_t> samples() const { return samples_; }
  std::span<uint8_t> samples() { return samples_; }

  bool same_shape(const ImageBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  uint32_t width_ = 0;
  uint32_t height_ = 0;
  uint32_t channels_ = 0;
  std::vector<uint8_t> samples_;
};

// Per-pixel boolean region; true marks the pixels an operation targets.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(uint32_t width, uint32_t height, bool fill = false);

  uint32_t width() const { return width_; }
  uint32_t height() const { return height_; }

  bool at(uint32_t x, uint32_t y) const {
    return bits_[size_t(y) * width_ + x] != 0;
  }
  void set(uint32_t x, uint32_t y, bool value) {
    bits_[size_t(y) * width_ + x] = value ? 1 : 0;
  }

  std::span<const uint8_t> bits() const { return bits_; }

  size_t count() const;
  bool all() const { return count() == bits_.size(); }
  bool none() const { return count() == 0; }

  bool matches(const ImageBuffer& img) const {
    return width_ == img.width() && height_ == img.height();
  }

  // Threshold: value >= 128 is true. Multi-channel input uses channel 0.
  static BinaryMask from_image(const ImageBuffer& img);
  // 0 / 255 single-channel raster.
  ImageBuffer to_image() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  uint32_t width_ = 0;
  uint32_t height_ = 0;
  std::vector<uint8_t> bits_;
};

struct RectROI {
  uint32_t x0 = 0;
  uint32_t y0 = 0;
  uint32_t width = 1;
  uint32_t height = 1;

  // Throws kInvalidArgument naming the violated edge.
  void check_fits(uint32_t image_width, uint32_t image_height) const;

  friend bool operator==(const RectROI&, const RectROI&) = default;
};

ImageBuffer to_grayscale(const ImageBuffer& img);
// Copies a single-channel image into three identical channels.
ImageBuffer replicate_channels(const ImageBuffer& gray);

ImageBuffer crop(const ImageBuffer& img, const RectROI& roi);

// Pixel-centre aligned bilinear resize.
ImageBuffer resize_bilinear(const ImageBuffer& img, uint32_t out_width,
                            uint32_t out_height);

// Bilinear sample at a continuous position where pixel (i, j) has its centre
// at (i, j). Positions outside [-0.5, w-0.5] x [-0.5, h-0.5] return false;
// inside that band neighbours are clamped to the image.
bool sample_bilinear(const ImageBuffer& img, double x, double y,
                     std::span<double> out);

// Rounds to nearest and clamps to [0, 255].
inline uint8_t to_u8(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<uint8_t>(v + 0.5);
}

// PNG and JPEG by extension. Errors carry the path (kIo).
ImageBuffer load_image(const std::filesystem::path& path);
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

// In-memory PNG encoding (for serving rasters over HTTP).
std::vector<uint8_t> encode_png(const ImageBuffer& img);

BinaryMask load_mask(const std::filesystem::path& path);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace lanewarp
