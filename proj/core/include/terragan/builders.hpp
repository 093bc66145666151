#pragma once

#include <utility>
#include <vector>

#include "terragan/model_spec.hpp"

namespace terragan {

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kDropoutRate = 0.5;
inline constexpr int kKernel = 5;

/// Knobs shared by the network builders. width_div divides every channel
/// count and hidden dense width, preserving the channel progression; it
/// exists so smoke-scale runs fit a single CPU. Paper-exact networks use 1.
struct BuildOptions {
  int width_div = 1;
  bool d_dropout = false;  // dropout after each LeakyReLU in the discriminator
  bool g_dropout = true;   // the generator table carries dropout rows
};

/// Generator: dense + reshape to a 1024-channel 8x8 base, stride-2 deconv
/// blocks up to `out`, stride-1 deconv head with tanh. out selects how many
/// trailing upsampling blocks are kept: 128 is the full network.
ModelSpec build_dcgan_generator(int latent_dim = 100, int out = 128,
                                const BuildOptions& opts = {});

/// Discriminator: stride-1 conv entry, stride-2 conv blocks down to 8x8,
/// flatten, dense sigmoid head.
ModelSpec build_dcgan_discriminator(int in = 128, const BuildOptions& opts = {});

/// Generator identical to the DCGAN generator; critic identical to the
/// discriminator except for a linear head and no dropout.
std::pair<ModelSpec, ModelSpec> build_wgan(int latent_dim = 100, int out = 128,
                                           const BuildOptions& opts = {});

enum class ProgBlock { kDeconv1, kDeconv2, kConv1, kConv2 };

/// The four reusable layer blocks of the progressive networks, at the given
/// low resolution (64 for the full-scale networks).
std::vector<LayerSpec> build_prog_block(ProgBlock block, int low_res = 64,
                                        int width_div = 1);

enum class ProgStage { kG64, kC64, kG128, kC128, kGGrowth, kCGrowth };

/// Staged progressive networks. high_res is the final resolution (128 for
/// the full-scale pair); the low-resolution stage runs at high_res / 2.
/// Growth stages blend the low-resolution path (weight 1-alpha) with the
/// high-resolution path (weight alpha); the runtime binds alpha when the
/// spec is materialized.
ModelSpec build_prog_stage(ProgStage stage, int high_res = 128,
                           int width_div = 1);

/// Encoder: stride-2 conv stack to an 8x8 map, flatten, dense 1024, then
/// parallel mu and sigma dense heads of width latent_dim.
ModelSpec build_vae_encoder(int latent_dim = 512, int in = 128,
                            int width_div = 1);

/// WGAN generator topology with latent_dim input and a sigmoid head.
ModelSpec build_vae_decoder(int latent_dim = 512, int out = 128,
                            const BuildOptions& opts = {});

/// z = mu + sigma * eps, elementwise. Throws DataError on length mismatch.
std::vector<float> reparameterize(const std::vector<float>& mu,
                                  const std::vector<float>& sigma,
                                  const std::vector<float>& eps);

}  // namespace terragan
