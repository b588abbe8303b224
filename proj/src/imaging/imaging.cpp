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

#include "lanewarp/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lanewarp/error.hpp"

namespace lanewarp {

namespace {

void check_dims(uint32_t width, uint32_t height, uint32_t channels) {
  if (width == 0 || height == 0) {
    fail(ErrorKind::kInvalidArgument, "image dimensions must be >= 1");
  }
  if (channels != 1 && channels != 3) {
    fail(ErrorKind::kInvalidArgument,
         "image must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

}  // namespace

ImageBuffer::ImageBuffer(uint32_t width, uint32_t height, uint32_t channels,
                         uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  samples_.assign(size_t(width) * height * channels, fill);
}

ImageBuffer::ImageBuffer(uint32_t width, uint32_t height, uint32_t channels,
                         std::vector<uint8_t> samples)
    : width_(width), height_(height), channels_(channels),
      samples_(std::move(samples)) {
  check_dims(width, height, channels);
  if (samples_.size() != size_t(width) * height * channels) {
    fail(ErrorKind::kInvalidArgument,
         "sample count " + std::to_string(samples_.size()) +
             " does not match " + std::to_string(width) + "x" +
             std::to_string(height) + "x" + std::to_string(channels));
  }
}

BinaryMask::BinaryMask(uint32_t width, uint32_t height, bool fill)
    : width_(width), height_(height) {
  if (width == 0 || height == 0) {
    fail(ErrorKind::kInvalidArgument, "mask dimensions must be >= 1");
  }
  bits_.assign(size_t(width) * height, fill ? 1 : 0);
}

size_t BinaryMask::count() const {
  return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

BinaryMask BinaryMask::from_image(const ImageBuffer& img) {
  BinaryMask mask(img.width(), img.height());
  for (uint32_t y = 0; y < img.height(); ++y) {
    for (uint32_t x = 0; x < img.width(); ++x) {
      mask.set(x, y, img.at(x, y, 0) >= 128);
    }
  }
  return mask;
}

ImageBuffer BinaryMask::to_image() const {
  ImageBuffer img(width_, height_, 1);
  auto out = img.samples();
  for (size_t i = 0; i < bits_.size(); ++i) out[i] = bits_[i] ? 255 : 0;
  return img;
}

void RectROI::check_fits(uint32_t image_width, uint32_t image_height) const {
  if (width == 0 || height == 0) {
    fail(ErrorKind::kInvalidArgument, "ROI width and height must be >= 1");
  }
  if (uint64_t(x0) + width > image_width) {
    fail(ErrorKind::kInvalidArgument,
         "ROI right edge " + std::to_string(uint64_t(x0) + width) +
             " exceeds image width " + std::to_string(image_width));
  }
  if (uint64_t(y0) + height > image_height) {
    fail(ErrorKind::kInvalidArgument,
         "ROI bottom edge " + std::to_string(uint64_t(y0) + height) +
             " exceeds image height " + std::to_string(image_height));
  }
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
  if (img.channels() != 3) {
    fail(ErrorKind::kInvalidArgument,
         "to_grayscale expects a 3-channel image");
  }
  ImageBuffer gray(img.width(), img.height(), 1);
  auto src = img.samples();
  auto dst = gray.samples();
  for (size_t i = 0; i < dst.size(); ++i) {
    double luma = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] +
                  0.114 * src[3 * i + 2];
    dst[i] = to_u8(std::round(luma));
  }
  return gray;
}

ImageBuffer replicate_channels(const ImageBuffer& gray) {
  if (gray.channels() != 1) {
    fail(ErrorKind::kInvalidArgument,
         "replicate_channels expects a 1-channel image");
  }
  ImageBuffer rgb(gray.width(), gray.height(), 3);
  auto src = gray.samples();
  auto dst = rgb.samples();
  for (size_t i = 0; i < src.size(); ++i) {
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  }
  return rgb;
}

ImageBuffer crop(const ImageBuffer& img, const RectROI& roi) {
  roi.check_fits(img.width(), img.height());
  const uint32_t ch = img.channels();
  ImageBuffer out(roi.width, roi.height, ch);
  auto src = img.samples();
  auto dst = out.samples();
  for (uint32_t y = 0; y < roi.height; ++y) {
    const auto* row =
        src.data() + (size_t(roi.y0 + y) * img.width() + roi.x0) * ch;
    std::copy(row, row + size_t(roi.width) * ch,
              dst.data() + size_t(y) * roi.width * ch);
  }
  return out;
}

bool sample_bilinear(const ImageBuffer& img, double x, double y,
                     std::span<double> out) {
  const double w = img.width();
  const double h = img.height();
  if (!(x >= -0.5 && x <= w - 0.5 && y >= -0.5 && y <= h - 0.5)) {
    return false;
  }
  x = std::clamp(x, 0.0, w - 1.0);
  y = std::clamp(y, 0.0, h - 1.0);
  const auto x0 = static_cast<uint32_t>(x);
  const auto y0 = static_cast<uint32_t>(y);
  const uint32_t x1 = std::min(x0 + 1, img.width() - 1);
  const uint32_t y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  for (uint32_t c = 0; c < img.channels(); ++c) {
    const double top = img.at(x0, y0, c) * (1 - fx) + img.at(x1, y0, c) * fx;
    const double bot = img.at(x0, y1, c) * (1 - fx) + img.at(x1, y1, c) * fx;
    out[c] = top * (1 - fy) + bot * fy;
  }
  return true;
}

ImageBuffer resize_bilinear(const ImageBuffer& img, uint32_t out_width,
                            uint32_t out_height) {
  if (out_width == 0 || out_height == 0) {
    fail(ErrorKind::kInvalidArgument, "resize target dimensions must be >= 1");
  }
  ImageBuffer out(out_width, out_height, img.channels());
  const double sx = double(img.width()) / out_width;
  const double sy = double(img.height()) / out_height;
  const double max_x = img.width() - 1.0;
  const double max_y = img.height() - 1.0;
  double px[3];
  for (uint32_t y = 0; y < out_height; ++y) {
    const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, max_y);
    for (uint32_t x = 0; x < out_width; ++x) {
      const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, max_x);
      sample_bilinear(img, src_x, src_y, std::span<double>(px, 3));
      for (uint32_t c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = to_u8(px[c]);
      }
    }
  }
  return out;
}

}  // namespace lanewarp
