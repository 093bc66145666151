#include "terragan/terrain_export.hpp"

#include <cstdio>
#include <fstream>

#include "terragan/errors.hpp"

namespace terragan {

Heightmap montage(const std::vector<Heightmap>& tiles, int columns,
                  bool separator) {
  if (tiles.empty()) throw DataError("montage: no tiles");
  if (columns < 1) throw DataError("montage: columns must be >= 1");
  const int tw = tiles.front().width;
  const int th = tiles.front().height;
  for (const Heightmap& t : tiles)
    if (t.width != tw || t.height != th)
      throw DataError("montage: mixed tile sizes");

  const int n = static_cast<int>(tiles.size());
  const int cols = std::min(columns, n);
  const int rows = (n + cols - 1) / cols;
  const int sep = separator ? 1 : 0;
  Heightmap out(cols * tw + (cols - 1) * sep, rows * th + (rows - 1) * sep, 255);

  for (int i = 0; i < n; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    const int y0 = r * (th + sep);
    const int x0 = c * (tw + sep);
    for (int y = 0; y < th; ++y)
      for (int x = 0; x < tw; ++x) out.at(y0 + y, x0 + x) = tiles[static_cast<size_t>(i)].at(y, x);
  }
  return out;
}

TerrainMesh heightmap_to_mesh(const Heightmap& h, float height_scale) {
  if (h.width < 2 || h.height < 2)
    throw DataError("heightmap_to_mesh: needs at least 2x2 pixels");
  TerrainMesh m;
  m.width = h.width;
  m.height = h.height;
  m.vertices.reserve(h.pixel_count());
  for (int r = 0; r < h.height; ++r) {
    for (int c = 0; c < h.width; ++c) {
      Vec3 v;
      v.x = static_cast<float>(c);
      v.y = static_cast<float>(h.height - 1 - r);
      v.z = height_scale * static_cast<float>(h.at(r, c)) / 255.0f;
      m.vertices.push_back(v);
    }
  }
  m.faces.reserve(static_cast<size_t>(2) * (h.width - 1) * (h.height - 1));
  for (int r = 0; r + 1 < h.height; ++r) {
    for (int c = 0; c + 1 < h.width; ++c) {
      int v00 = r * h.width + c;
      int v01 = v00 + 1;
      int v10 = v00 + h.width;
      int v11 = v10 + 1;
      m.faces.push_back({v00, v10, v11});
      m.faces.push_back({v00, v11, v01});
    }
  }
  return m;
}

void save_mesh_obj(const TerrainMesh& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write mesh: " + path.string());
  char buf[96];
  for (const Vec3& v : m.vertices) {
    std::snprintf(buf, sizeof buf, "v %g %g %g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const TriFace& f : m.faces) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", f.a + 1, f.b + 1, f.c + 1);
    out << buf;
  }
  if (!out) throw DataError("write failure: " + path.string());
}

}  // namespace terragan
