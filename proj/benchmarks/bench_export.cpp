#include <benchmark/benchmark.h>

#include "terragan/synthetic.hpp"
#include "terragan/terrain_export.hpp"

using namespace terragan;

namespace {

void BM_HeightmapToMesh(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  Heightmap h = make_synthetic_raster(size, size, 21);
  for (auto _ : state) {
    TerrainMesh m = heightmap_to_mesh(h, 32.0f);
    benchmark::DoNotOptimize(m.faces.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(size - 1) * (size - 1) * 2);
}
BENCHMARK(BM_HeightmapToMesh)->Arg(128)->Arg(512);

void BM_Montage(benchmark::State& state) {
  std::vector<Heightmap> tiles;
  for (int i = 0; i < 16; ++i)
    tiles.push_back(make_synthetic_raster(128, 128, 30 + static_cast<uint64_t>(i)));
  for (auto _ : state) {
    Heightmap m = montage(tiles, 4);
    benchmark::DoNotOptimize(m.pixels.data());
  }
}
BENCHMARK(BM_Montage);

}  // namespace
