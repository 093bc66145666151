#pragma once

#include <cstdint>

#include "terragan/heightmap.hpp"

namespace terragan {

/// Deterministic fractal-ish terrain raster built from seeded cosine bumps;
/// useful as demo input and as a stand-in corpus source in tests. Values
/// span roughly the full intensity range but avoid the 255 fill sentinel.
Heightmap make_synthetic_raster(int width, int height, uint64_t seed);

/// A stack of small independent synthetic tiles that all pass the corpus
/// filter (no 255s, enough land).
std::vector<Heightmap> make_synthetic_tiles(int count, int size, uint64_t seed);

}  // namespace terragan
