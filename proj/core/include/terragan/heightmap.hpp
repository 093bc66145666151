#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace terragan {

/// Single-channel raster with 8-bit intensity semantics. The universal
/// currency of the pipeline: source elevation rasters, corpus tiles and
/// generated maps are all Heightmaps.
struct Heightmap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major, height*width entries
  /// Intensity range of the original source before conversion to 8-bit
  /// (e.g. {0, 65535} for a 16-bit raster). Kept as provenance metadata.
  std::pair<double, double> value_range{0.0, 255.0};

  Heightmap() = default;
  Heightmap(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

  uint8_t at(int row, int col) const {
    return pixels[static_cast<size_t>(row) * width + col];
  }
  uint8_t& at(int row, int col) {
    return pixels[static_cast<size_t>(row) * width + col];
  }
  size_t pixel_count() const { return pixels.size(); }
  bool valid() const {
    return width >= 1 && height >= 1 &&
           pixels.size() == static_cast<size_t>(width) * height;
  }
};

/// Target range of the affine [0,255] -> float mapping used to feed models.
enum class NormRange {
  kMinusOneOne,  // tanh-output models
  kZeroOne,      // sigmoid-output models
};

/// Affine map of [0,255] onto the requested range.
std::vector<float> normalize(const Heightmap& h, NormRange range);

/// Inverse of normalize; values are clamped to the range and rounded back
/// to 8-bit. Round-trips within 1/255 absolute error.
Heightmap denormalize(const std::vector<float>& values, int width, int height,
                      NormRange range);

float normalize_pixel(uint8_t p, NormRange range);
uint8_t denormalize_pixel(float v, NormRange range);

}  // namespace terragan
