#include "terragan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "terragan/rng.hpp"

namespace terragan {
namespace {

constexpr double kTau = 6.28318530717958647692;

struct Bump {
  double fx, fy, phase, amp;
};

std::vector<Bump> draw_bumps(Rng& rng, int count, double max_freq) {
  std::vector<Bump> bumps(static_cast<size_t>(count));
  for (Bump& b : bumps) {
    b.fx = rng.uniform(0.5, max_freq);
    b.fy = rng.uniform(0.5, max_freq);
    b.phase = rng.uniform(0.0, kTau);
    b.amp = rng.uniform(0.3, 1.0);
  }
  return bumps;
}

double field(const std::vector<Bump>& bumps, double u, double v) {
  double sum = 0.0;
  for (const Bump& b : bumps)
    sum += b.amp * std::cos(kTau * (b.fx * u + b.fy * v) + b.phase);
  return sum;
}

}  // namespace

Heightmap make_synthetic_raster(int width, int height, uint64_t seed) {
  Rng rng(seed);
  std::vector<Bump> bumps = draw_bumps(rng, 12, 6.0);
  double amp_total = 0.0;
  for (const Bump& b : bumps) amp_total += b.amp;

  Heightmap h(width, height);
  for (int y = 0; y < height; ++y) {
    double v = static_cast<double>(y) / height;
    for (int x = 0; x < width; ++x) {
      double u = static_cast<double>(x) / width;
      double t = field(bumps, u, v) / amp_total;  // roughly [-1, 1]
      // Stretch toward land/sea contrast and keep off the 255 sentinel.
      double unit = 0.5 + 0.5 * std::tanh(1.6 * t);
      h.at(y, x) = static_cast<uint8_t>(std::clamp(30.0 + unit * 210.0, 0.0, 254.0));
    }
  }
  return h;
}

std::vector<Heightmap> make_synthetic_tiles(int count, int size, uint64_t seed) {
  std::vector<Heightmap> tiles;
  tiles.reserve(static_cast<size_t>(count));
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    std::vector<Bump> bumps = draw_bumps(rng, 8, 3.0);
    double amp_total = 0.0;
    for (const Bump& b : bumps) amp_total += b.amp;
    Heightmap t(size, size);
    for (int y = 0; y < size; ++y) {
      double v = static_cast<double>(y) / size;
      for (int x = 0; x < size; ++x) {
        double u = static_cast<double>(x) / size;
        double f = field(bumps, u, v) / amp_total;
        double unit = 0.5 + 0.5 * std::tanh(1.6 * f);
        t.at(y, x) =
            static_cast<uint8_t>(std::clamp(30.0 + unit * 210.0, 0.0, 254.0));
      }
    }
    tiles.push_back(std::move(t));
  }
  return tiles;
}

}  // namespace terragan
