#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "terragan/heightmap.hpp"

namespace terragan {

/// Row-major grid of equally sized tiles with a 1-pixel separator at
/// intensity 255 between cells (separator optional). Trailing cells of a
/// ragged last row are filled with 255.
Heightmap montage(const std::vector<Heightmap>& tiles, int columns,
                  bool separator = true);

struct Vec3 {
  float x = 0.0f, y = 0.0f, z = 0.0f;
};

struct TriFace {
  int a = 0, b = 0, c = 0;  // vertex indices, 0-based in memory
};

/// One vertex per pixel, two triangles per pixel quad, counter-clockwise
/// seen from +z. x = column, y = height-1-row (north up),
/// z = height_scale * pixel / 255.
struct TerrainMesh {
  int width = 0;
  int height = 0;
  std::vector<Vec3> vertices;
  std::vector<TriFace> faces;
};

TerrainMesh heightmap_to_mesh(const Heightmap& h, float height_scale);

/// Wavefront-style text mesh: `v x y z` lines then `f a b c` lines with
/// 1-based indices; byte-deterministic for a given mesh.
void save_mesh_obj(const TerrainMesh& m, const std::filesystem::path& path);

}  // namespace terragan
