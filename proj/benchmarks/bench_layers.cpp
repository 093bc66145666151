#include <benchmark/benchmark.h>

#include "terragan/builders.hpp"
#include "terragan/network.hpp"

using namespace terragan;

namespace {

Tensor random_batch(int n, int c, int h, int w, uint64_t seed) {
  Tensor t(n, c, h, w);
  Rng rng(seed);
  for (float& v : t.v) v = static_cast<float>(rng.normal());
  return t;
}

void BM_GeneratorForward(benchmark::State& state) {
  const int div = static_cast<int>(state.range(0));
  Rng init(1);
  Network g = Network::materialize(
      build_dcgan_generator(100, 32, BuildOptions{div}), init);
  Tensor z = random_batch(16, 100, 1, 1, 2);
  for (auto _ : state) {
    Tensor y = g.forward(z, false);
    benchmark::DoNotOptimize(y.v.data());
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_GeneratorForward)->Arg(16)->Arg(8)->Arg(4);

void BM_DiscriminatorStep(benchmark::State& state) {
  const int div = static_cast<int>(state.range(0));
  Rng init(3);
  Network d = Network::materialize(
      build_dcgan_discriminator(32, BuildOptions{div}), init);
  Tensor x = random_batch(16, 1, 32, 32, 4);
  Tensor dy(16, 1, 1, 1);
  for (float& v : dy.v) v = 0.0625f;
  for (auto _ : state) {
    Tensor y = d.forward(x, true);
    d.zero_grads();
    Tensor dx = d.backward(dy);
    benchmark::DoNotOptimize(dx.v.data());
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_DiscriminatorStep)->Arg(16)->Arg(8);

void BM_EncoderForward(benchmark::State& state) {
  Rng init(5);
  VaeEncoder enc =
      VaeEncoder::materialize(build_vae_encoder(64, 32, 8), init);
  Tensor x = random_batch(16, 1, 32, 32, 6);
  for (auto _ : state) {
    auto [mu, logvar] = enc.forward(x, false);
    benchmark::DoNotOptimize(mu.v.data());
    benchmark::DoNotOptimize(logvar.v.data());
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_EncoderForward);

}  // namespace
