#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace glomseg {

// Row-major HWC float image with values in [0, 1]. 8-bit PNGs quantize with
// round-to-nearest on write.
struct ImageBuffer {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  ImageBuffer() = default;
  ImageBuffer(int h, int w, int c)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, 0.0f) {}

  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
};

// Binary mask, one byte per pixel, values 0 or 1.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::int64_t area() const;
};

// 8-bit PNG IO. Reading accepts gray, gray+alpha, RGB and RGBA (palette and
// 16-bit inputs are expanded/stripped to 8-bit); alpha is dropped. Writing
// accepts 1-channel (gray) or 3-channel (RGB) buffers.
ImageBuffer read_png(const std::string& path);
void write_png(const std::string& path, const ImageBuffer& image);

// Masks round-trip through gray PNGs with 0/255 pixels; reading thresholds at
// >= 128.
Mask read_mask_png(const std::string& path);
void write_mask_png(const std::string& path, const Mask& mask);

// Sorted list of *.png files (by filename) directly inside a directory.
std::vector<std::string> list_png_files(const std::string& dir);

}  // namespace glomseg
