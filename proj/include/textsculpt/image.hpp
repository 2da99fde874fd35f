#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "textsculpt/geometry.hpp"

namespace textsculpt {

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 0;
  bool operator==(const Rgba&) const = default;
};

/// 8-bit RGBA raster, row-major, non-premultiplied.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgba fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  Size size() const { return {width_, height_}; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Rgba at(int x, int y) const {
    const auto* p = &data_[index(x, y)];
    return {p[0], p[1], p[2], p[3]};
  }
  void set(int x, int y, Rgba c) {
    auto* p = &data_[index(x, y)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
    p[3] = c.a;
  }

  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y) const { return (static_cast<std::size_t>(y) * width_ + x) * 4; }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Binary raster (0 = clear, 1 = set) at image resolution.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool value = false)
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, value ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  Size size() const { return {width_, height_}; }

  bool at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

  /// Sets every pixel of `r` (clipped to the mask).
  void fill(const Rect& r);
  long long count() const;
  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// ITU-R BT.601 luma of each pixel, in [0, 255]. Alpha is ignored.
std::vector<double> to_luma(const Image& img);

/// Copies `region` of `img` (clipped) into a fresh image.
Image crop(const Image& img, const Rect& region);

Image read_image(const std::filesystem::path& path);
void write_png(const Image& img, const std::filesystem::path& path);

/// PNG bytes in memory; the encoder settings are fixed so output is byte-stable.
std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const std::uint8_t> bytes);

/// Reads only the header of a PNG or JPEG file.
Size read_image_size(const std::filesystem::path& path);

}  // namespace textsculpt
