#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "terragan/heightmap.hpp"
#include "terragan/rng.hpp"

namespace terragan {

/// Monotone non-decreasing intensity remap with curve(0) == 0, stored as a
/// 256-entry lookup table.
class BrightnessCurve {
 public:
  /// Validates monotonicity and the zero fixed point; throws DataError.
  explicit BrightnessCurve(const std::array<uint8_t, 256>& lut);

  static BrightnessCurve identity();
  /// round-down of 255*(p/255)^gamma; gamma < 1 lifts low altitudes.
  static BrightnessCurve gamma(double g);

  uint8_t operator()(uint8_t p) const { return lut_[p]; }

 private:
  std::array<uint8_t, 256> lut_;
};

Heightmap brightness_remap(const Heightmap& h, const BrightnessCurve& curve);

/// Offsets of a sliding window over a raster. Pure arithmetic; lets callers
/// count tiles for arbitrarily large rasters without materializing them.
struct SlidingGrid {
  int tile = 0;
  int stride = 0;
  int count_x = 0;  // columns of tiles
  int count_y = 0;  // rows of tiles

  int64_t count() const { return static_cast<int64_t>(count_x) * count_y; }
  int offset_x(int i) const { return i * stride; }
  int offset_y(int j) const { return j * stride; }
};

/// Throws DataError when the tile does not fit or the stride is < 1.
SlidingGrid make_sliding_grid(int width, int height, int tile, int stride);

/// Crops every full tile at offsets (i*stride, j*stride), row-major.
std::vector<Heightmap> crop_sliding(const Heightmap& h, int tile, int stride);

struct AugmentSpec {
  double rotation_degrees = 0.0;  // in [0, 180], counter-clockwise
  bool hflip = false;
  bool vflip = false;
  uint8_t fill_value = 255;
};

/// Rotation about the image center with nearest-neighbor sampling, then
/// flips. Pixels with no source coverage take fill_value. Nearest-neighbor
/// resampling keeps the fill sentinel exact: it never bleeds into blended
/// values, so the downstream sentinel filter stays reliable.
Heightmap augment(const Heightmap& h, const AugmentSpec& spec);

enum class FilterReason : uint8_t {
  kKept = 0,
  kMostlyLow,         // >= low_fraction of pixels at or below low_threshold
  kContainsSentinel,  // at least one pixel equals the fill sentinel
};

struct FilterDecision {
  bool keep = false;
  FilterReason reason = FilterReason::kKept;
  double low_ratio = 0.0;
};

const char* filter_reason_name(FilterReason r);

/// Rejects mostly-water tiles and tiles touched by augmentation fill.
/// The fraction comparison is >= (a tile exactly at the threshold is
/// rejected).
FilterDecision filter_tile(const Heightmap& t, int low_threshold = 25,
                           double low_fraction = 0.95, uint8_t sentinel = 255);

/// Nearest-neighbor downscale to target x target. Source lookup uses pixel
/// centers: src = floor((dst + 0.5) * size_ratio), clamped; ties fall toward
/// the higher index. Every output value exists somewhere in the input.
Heightmap downscale_nn(const Heightmap& h, int target);

struct ManifestEntry {
  std::string id;
  int round = 0;  // 1-based; round 1 is the untransformed source
  AugmentSpec transform;
  int row = 0;  // tile row index within the round's grid
  int col = 0;
  bool kept = false;
  FilterReason reason = FilterReason::kKept;
};

struct CorpusManifest {
  int tile_size = 0;
  int stride = 0;
  int rounds = 0;
  int target = 0;
  uint64_t seed = 0;
  std::vector<ManifestEntry> entries;
  int kept_count = 0;
};

struct CorpusOptions {
  int rounds = 1;
  int tile = 1024;
  int stride = 512;
  int target = 128;
  uint64_t seed = 0;
};

struct TileCorpus {
  std::vector<Heightmap> tiles;  // kept tiles, downscaled to target
  CorpusManifest manifest;
};

/// Round 1 crops the untransformed source; rounds 2..N redraw an AugmentSpec
/// (rotation uniform in [0,180], each flip with probability 1/2) from the
/// seeded generator, re-crop, filter and downscale. Bit-deterministic for a
/// fixed seed regardless of execution order.
TileCorpus build_corpus(const Heightmap& source, const CorpusOptions& opts);

/// One tile image per kept entry plus a line-delimited manifest file.
void save_corpus(const TileCorpus& corpus, const std::filesystem::path& dir);
TileCorpus load_corpus(const std::filesystem::path& dir);

void save_manifest(const CorpusManifest& m, const std::filesystem::path& path);
CorpusManifest load_manifest(const std::filesystem::path& path);

}  // namespace terragan
