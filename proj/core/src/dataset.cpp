#include "terragan/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "terragan/errors.hpp"
#include "terragan/image_io.hpp"

namespace terragan {

// ---------------------------------------------------------------- normalize

float normalize_pixel(uint8_t p, NormRange range) {
  float unit = static_cast<float>(p) / 255.0f;
  return range == NormRange::kZeroOne ? unit : 2.0f * unit - 1.0f;
}

uint8_t denormalize_pixel(float v, NormRange range) {
  float unit = range == NormRange::kZeroOne ? v : (v + 1.0f) * 0.5f;
  unit = std::clamp(unit, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(unit * 255.0f));
}

std::vector<float> normalize(const Heightmap& h, NormRange range) {
  std::vector<float> out(h.pixel_count());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = normalize_pixel(h.pixels[i], range);
  return out;
}

Heightmap denormalize(const std::vector<float>& values, int width, int height,
                      NormRange range) {
  if (values.size() != static_cast<size_t>(width) * height)
    throw DataError("denormalize: size mismatch");
  Heightmap h(width, height);
  for (size_t i = 0; i < values.size(); ++i)
    h.pixels[i] = denormalize_pixel(values[i], range);
  return h;
}

// --------------------------------------------------------------- brightness

BrightnessCurve::BrightnessCurve(const std::array<uint8_t, 256>& lut)
    : lut_(lut) {
  if (lut_[0] != 0) throw DataError("brightness curve must map 0 to 0");
  for (int i = 1; i < 256; ++i)
    if (lut_[i] < lut_[i - 1])
      throw DataError("brightness curve must be monotone non-decreasing");
}

BrightnessCurve BrightnessCurve::identity() {
  std::array<uint8_t, 256> lut;
  for (int i = 0; i < 256; ++i) lut[i] = static_cast<uint8_t>(i);
  return BrightnessCurve(lut);
}

BrightnessCurve BrightnessCurve::gamma(double g) {
  if (!(g > 0.0)) throw DataError("gamma must be positive");
  std::array<uint8_t, 256> lut;
  lut[0] = 0;
  for (int i = 1; i < 256; ++i) {
    double v = 255.0 * std::pow(i / 255.0, g);
    lut[i] = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return BrightnessCurve(lut);
}

Heightmap brightness_remap(const Heightmap& h, const BrightnessCurve& curve) {
  Heightmap out = h;
  for (auto& p : out.pixels) p = curve(p);
  return out;
}

// --------------------------------------------------------------------- crop

SlidingGrid make_sliding_grid(int width, int height, int tile, int stride) {
  if (stride < 1) throw DataError("stride must be >= 1");
  if (tile < 1 || tile > width || tile > height)
    throw DataError("tile larger than raster");
  SlidingGrid g;
  g.tile = tile;
  g.stride = stride;
  g.count_x = (width - tile) / stride + 1;
  g.count_y = (height - tile) / stride + 1;
  return g;
}

std::vector<Heightmap> crop_sliding(const Heightmap& h, int tile, int stride) {
  SlidingGrid g = make_sliding_grid(h.width, h.height, tile, stride);
  std::vector<Heightmap> tiles;
  tiles.reserve(static_cast<size_t>(g.count()));
  for (int j = 0; j < g.count_y; ++j) {
    int y0 = g.offset_y(j);
    for (int i = 0; i < g.count_x; ++i) {
      int x0 = g.offset_x(i);
      Heightmap t(tile, tile);
      t.value_range = h.value_range;
      for (int r = 0; r < tile; ++r) {
        const uint8_t* src = &h.pixels[static_cast<size_t>(y0 + r) * h.width + x0];
        std::copy(src, src + tile, &t.pixels[static_cast<size_t>(r) * tile]);
      }
      tiles.push_back(std::move(t));
    }
  }
  return tiles;
}

// ------------------------------------------------------------------ augment

Heightmap augment(const Heightmap& h, const AugmentSpec& spec) {
  if (spec.rotation_degrees < 0.0 || spec.rotation_degrees > 180.0)
    throw DataError("rotation must lie in [0, 180] degrees");

  Heightmap out(h.width, h.height, spec.fill_value);
  out.value_range = h.value_range;

  const double rad = spec.rotation_degrees * 3.14159265358979323846 / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cx = (h.width - 1) / 2.0;
  const double cy = (h.height - 1) / 2.0;

  for (int y = 0; y < h.height; ++y) {
    for (int x = 0; x < h.width; ++x) {
      // Flips happen after rotation, so invert them first.
      int dx = spec.hflip ? h.width - 1 - x : x;
      int dy = spec.vflip ? h.height - 1 - y : y;
      // Inverse rotation of the destination pixel.
      double rx = dx - cx;
      double ry = dy - cy;
      double sx = c * rx + s * ry + cx;
      double sy = -s * rx + c * ry + cy;
      int ix = static_cast<int>(std::lround(sx));
      int iy = static_cast<int>(std::lround(sy));
      if (ix >= 0 && ix < h.width && iy >= 0 && iy < h.height)
        out.at(y, x) = h.at(iy, ix);
    }
  }
  return out;
}

// ------------------------------------------------------------------- filter

const char* filter_reason_name(FilterReason r) {
  switch (r) {
    case FilterReason::kKept:
      return "-";
    case FilterReason::kMostlyLow:
      return "mostly_water";
    case FilterReason::kContainsSentinel:
      return "contains_fill";
  }
  return "?";
}

FilterDecision filter_tile(const Heightmap& t, int low_threshold,
                           double low_fraction, uint8_t sentinel) {
  size_t low = 0;
  bool has_sentinel = false;
  for (uint8_t p : t.pixels) {
    if (p <= low_threshold) ++low;
    if (p == sentinel) has_sentinel = true;
  }
  FilterDecision d;
  d.low_ratio = static_cast<double>(low) / static_cast<double>(t.pixel_count());
  if (d.low_ratio >= low_fraction) {
    d.keep = false;
    d.reason = FilterReason::kMostlyLow;
  } else if (has_sentinel) {
    d.keep = false;
    d.reason = FilterReason::kContainsSentinel;
  } else {
    d.keep = true;
    d.reason = FilterReason::kKept;
  }
  return d;
}

// ---------------------------------------------------------------- downscale

Heightmap downscale_nn(const Heightmap& h, int target) {
  if (target < 1) throw DataError("downscale target must be >= 1");
  Heightmap out(target, target);
  out.value_range = h.value_range;
  const double sx = static_cast<double>(h.width) / target;
  const double sy = static_cast<double>(h.height) / target;
  for (int y = 0; y < target; ++y) {
    int src_y = std::min(h.height - 1, static_cast<int>((y + 0.5) * sy));
    for (int x = 0; x < target; ++x) {
      int src_x = std::min(h.width - 1, static_cast<int>((x + 0.5) * sx));
      out.at(y, x) = h.at(src_y, src_x);
    }
  }
  return out;
}

// ------------------------------------------------------------------- corpus

namespace {

std::string tile_id(int round, int row, int col) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "r%02d_y%03d_x%03d", round, row, col);
  return buf;
}

}  // namespace

TileCorpus build_corpus(const Heightmap& source, const CorpusOptions& opts) {
  if (opts.rounds < 1) throw DataError("rounds must be >= 1");
  if (!source.valid()) throw DataError("invalid source raster");

  // All augmentation parameters are drawn up front, in round order, so the
  // per-tile work can be parallelized without touching shared state.
  Rng rng = Rng(opts.seed).fork(0x617567);  // augment stream
  std::vector<AugmentSpec> round_specs(static_cast<size_t>(opts.rounds));
  for (int r = 2; r <= opts.rounds; ++r) {
    AugmentSpec spec;
    spec.rotation_degrees = rng.uniform(0.0, 180.0);
    spec.hflip = rng.bernoulli(0.5);
    spec.vflip = rng.bernoulli(0.5);
    round_specs[static_cast<size_t>(r - 1)] = spec;
  }

  TileCorpus corpus;
  corpus.manifest.tile_size = opts.tile;
  corpus.manifest.stride = opts.stride;
  corpus.manifest.rounds = opts.rounds;
  corpus.manifest.target = opts.target;
  corpus.manifest.seed = opts.seed;

  SlidingGrid grid =
      make_sliding_grid(source.width, source.height, opts.tile, opts.stride);

  for (int round = 1; round <= opts.rounds; ++round) {
    const AugmentSpec& spec = round_specs[static_cast<size_t>(round - 1)];
    Heightmap transformed =
        round == 1 ? source : augment(source, spec);
    for (int row = 0; row < grid.count_y; ++row) {
      for (int col = 0; col < grid.count_x; ++col) {
        Heightmap tile(opts.tile, opts.tile);
        int y0 = grid.offset_y(row);
        int x0 = grid.offset_x(col);
        for (int r = 0; r < opts.tile; ++r) {
          const uint8_t* src =
              &transformed.pixels[static_cast<size_t>(y0 + r) * transformed.width + x0];
          std::copy(src, src + opts.tile,
                    &tile.pixels[static_cast<size_t>(r) * opts.tile]);
        }
        FilterDecision d = filter_tile(tile);
        ManifestEntry e;
        e.id = tile_id(round, row, col);
        e.round = round;
        e.transform = round == 1 ? AugmentSpec{} : spec;
        e.row = row;
        e.col = col;
        e.kept = d.keep;
        e.reason = d.reason;
        corpus.manifest.entries.push_back(std::move(e));
        if (d.keep) {
          corpus.tiles.push_back(opts.target == opts.tile
                                     ? std::move(tile)
                                     : downscale_nn(tile, opts.target));
          ++corpus.manifest.kept_count;
        }
      }
    }
  }
  return corpus;
}

// -------------------------------------------------------------- manifest io

void save_manifest(const CorpusManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  out << "# terragan corpus manifest v1\n";
  out << "tile_size=" << m.tile_size << "\n";
  out << "stride=" << m.stride << "\n";
  out << "rounds=" << m.rounds << "\n";
  out << "target=" << m.target << "\n";
  out << "seed=" << m.seed << "\n";
  out << "kept_count=" << m.kept_count << "\n";
  out << "# id round rotation hflip vflip row col kept reason\n";
  for (const ManifestEntry& e : m.entries) {
    char rot[32];
    std::snprintf(rot, sizeof rot, "%.10g", e.transform.rotation_degrees);
    out << e.id << ' ' << e.round << ' ' << rot << ' ' << (e.transform.hflip ? 1 : 0)
        << ' ' << (e.transform.vflip ? 1 : 0) << ' ' << e.row << ' ' << e.col << ' '
        << (e.kept ? 1 : 0) << ' ' << filter_reason_name(e.reason) << "\n";
  }
  if (!out) throw DataError("write failure: " + path.string());
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  CorpusManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq != std::string::npos && line.find(' ') == std::string::npos) {
      std::string key = line.substr(0, eq);
      std::string val = line.substr(eq + 1);
      try {
        if (key == "tile_size") m.tile_size = std::stoi(val);
        else if (key == "stride") m.stride = std::stoi(val);
        else if (key == "rounds") m.rounds = std::stoi(val);
        else if (key == "target") m.target = std::stoi(val);
        else if (key == "seed") m.seed = std::stoull(val);
        else if (key == "kept_count") m.kept_count = std::stoi(val);
        else throw DataError("unknown manifest key");
      } catch (const std::exception&) {
        throw DataError("manifest line " + std::to_string(lineno) + ": bad value");
      }
      continue;
    }
    std::istringstream fields(line);
    ManifestEntry e;
    int hflip = 0, vflip = 0, kept = 0;
    std::string reason;
    if (!(fields >> e.id >> e.round >> e.transform.rotation_degrees >> hflip >>
          vflip >> e.row >> e.col >> kept >> reason))
      throw DataError("manifest line " + std::to_string(lineno) + ": malformed entry");
    e.transform.hflip = hflip != 0;
    e.transform.vflip = vflip != 0;
    e.kept = kept != 0;
    if (reason == "-") e.reason = FilterReason::kKept;
    else if (reason == "mostly_water") e.reason = FilterReason::kMostlyLow;
    else if (reason == "contains_fill") e.reason = FilterReason::kContainsSentinel;
    else throw DataError("manifest line " + std::to_string(lineno) + ": bad reason");
    m.entries.push_back(std::move(e));
  }
  int kept = 0;
  for (const auto& e : m.entries) kept += e.kept ? 1 : 0;
  if (kept != m.kept_count)
    throw DataError("manifest kept_count does not match entries");
  return m;
}

void save_corpus(const TileCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_manifest(corpus.manifest, dir / "manifest");
  size_t next = 0;
  for (const ManifestEntry& e : corpus.manifest.entries) {
    if (!e.kept) continue;
    if (next >= corpus.tiles.size()) throw DataError("corpus tile list too short");
    save_heightmap(corpus.tiles[next], dir / (e.id + ".pgm"));
    ++next;
  }
  if (next != corpus.tiles.size())
    throw DataError("corpus tile list does not match manifest");
}

TileCorpus load_corpus(const std::filesystem::path& dir) {
  TileCorpus corpus;
  corpus.manifest = load_manifest(dir / "manifest");
  corpus.tiles.reserve(static_cast<size_t>(corpus.manifest.kept_count));
  for (const ManifestEntry& e : corpus.manifest.entries) {
    if (!e.kept) continue;
    corpus.tiles.push_back(load_raster(dir / (e.id + ".pgm")));
  }
  return corpus;
}

}  // namespace terragan
