#include <benchmark/benchmark.h>

#include "terragan/dataset.hpp"
#include "terragan/synthetic.hpp"

using namespace terragan;

namespace {

void BM_CropSliding(benchmark::State& state) {
  Heightmap source = make_synthetic_raster(1024, 1024, 11);
  for (auto _ : state) {
    auto tiles = crop_sliding(source, 256, 128);
    benchmark::DoNotOptimize(tiles.data());
  }
  state.SetItemsProcessed(state.iterations() * 49);
}
BENCHMARK(BM_CropSliding);

void BM_Augment(benchmark::State& state) {
  Heightmap source = make_synthetic_raster(1024, 1024, 12);
  AugmentSpec spec;
  spec.rotation_degrees = 37.0;
  spec.hflip = true;
  for (auto _ : state) {
    Heightmap out = augment(source, spec);
    benchmark::DoNotOptimize(out.pixels.data());
  }
}
BENCHMARK(BM_Augment);

void BM_FilterTile(benchmark::State& state) {
  Heightmap tile = make_synthetic_raster(1024, 1024, 13);
  for (auto _ : state) {
    FilterDecision d = filter_tile(tile);
    benchmark::DoNotOptimize(d.keep);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(tile.pixel_count()));
}
BENCHMARK(BM_FilterTile);

void BM_DownscaleNn(benchmark::State& state) {
  Heightmap tile = make_synthetic_raster(1024, 1024, 14);
  for (auto _ : state) {
    Heightmap out = downscale_nn(tile, 128);
    benchmark::DoNotOptimize(out.pixels.data());
  }
}
BENCHMARK(BM_DownscaleNn);

void BM_BuildCorpus(benchmark::State& state) {
  Heightmap source = make_synthetic_raster(1024, 1024, 15);
  CorpusOptions opts;
  opts.rounds = static_cast<int>(state.range(0));
  opts.tile = 256;
  opts.stride = 128;
  opts.target = 64;
  opts.seed = 3;
  for (auto _ : state) {
    TileCorpus corpus = build_corpus(source, opts);
    benchmark::DoNotOptimize(corpus.manifest.kept_count);
  }
}
BENCHMARK(BM_BuildCorpus)->Arg(1)->Arg(4);

}  // namespace
