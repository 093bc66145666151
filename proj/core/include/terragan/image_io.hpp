#pragma once

#include <filesystem>

#include "terragan/heightmap.hpp"

namespace terragan {

/// Loads a single-channel PGM raster (binary P5 or ascii P2, 8- or 16-bit).
/// 16-bit samples are linearly mapped onto [0,255]; the original range is
/// recorded in value_range. Throws DataError for unreadable files,
/// multi-channel images (PPM) or zero-dimension rasters.
Heightmap load_raster(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM. load_raster round-trips bit-exactly.
void save_heightmap(const Heightmap& h, const std::filesystem::path& path);

}  // namespace terragan
