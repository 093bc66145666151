#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "terragan/checkpoint.hpp"
#include "terragan/dataset.hpp"
#include "terragan/heightmap.hpp"
#include "terragan/network.hpp"
#include "terragan/tensor.hpp"
#include "terragan/train_config.hpp"
#include "terragan/train_log.hpp"

namespace terragan {

/// Normalized training set: all corpus tiles stacked as (n, 1, s, s).
struct TrainingSet {
  Tensor tiles;
  NormRange range = NormRange::kMinusOneOne;

  int size() const { return tiles.n; }
  int tile_px() const { return tiles.h; }
};

TrainingSet to_training_set(const std::vector<Heightmap>& tiles, NormRange range);

/// Per-sample additive standard-normal noise scaled by factor, clamped to
/// the model input range. Keeps the clamp mask so gradients can flow back
/// through un-clamped elements.
class InstanceNoise {
 public:
  InstanceNoise(double factor, float lo, float hi)
      : factor_(factor), lo_(lo), hi_(hi) {}
  Tensor apply(const Tensor& x, Rng& rng);
  Tensor backward(const Tensor& dy) const;

 private:
  double factor_;
  float lo_, hi_;
  std::vector<uint8_t> clamped_;
};

/// Convenience wrapper for the spec-level operation.
Tensor apply_instance_noise(const Tensor& batch, double factor, Rng& rng,
                            float lo, float hi);

/// One-sided label smoothing: real targets become 1 - beta, fake targets
/// stay 0 and the generator still aims for 1.
inline float real_label_target(double beta) {
  return static_cast<float>(1.0 - beta);
}

/// Where checkpoints and logs land. An empty out_dir keeps everything in
/// memory (used heavily by tests).
struct TrainIO {
  std::filesystem::path out_dir;
};

TrainLog train_dcgan(const TrainingSet& data, const TrainConfig& cfg,
                     const TrainIO& io);

/// Observation points for tests and tooling; every callback is optional.
struct TrainHooks {
  std::function<void()> on_critic_update;
  std::function<void()> on_generator_update;
};

TrainLog train_wgan(const TrainingSet& data, const TrainConfig& cfg,
                    const TrainIO& io, const TrainHooks& hooks = {});

/// Three logs: low-resolution stage, growth stage, high-resolution stage.
std::array<TrainLog, 3> train_proggan(const TrainingSet& data,
                                      const TrainConfig& cfg, const TrainIO& io);

struct VaeTrainResult {
  TrainLog log;
  Checkpoint encoder;
  Checkpoint decoder;
  Checkpoint moments;  // tensors "mu" and "sigma", one row per corpus tile
};

VaeTrainResult train_vae(const TrainingSet& data, const TrainConfig& cfg,
                         const TrainIO& io);

/// WGAN training with the generator restored from a decoder checkpoint.
/// learned_moments draws a stored (mu, sigma) row uniformly and
/// reparameterizes it.
TrainLog train_vae_wgan(const TrainingSet& data, const TrainConfig& cfg,
                        const Checkpoint& decoder_ckpt,
                        const Checkpoint* moments, const TrainIO& io);

/// Runs the paired vae-then-wgan pipeline of a vae-wgan config.
struct VaeWganResult {
  TrainLog vae_log;
  TrainLog wgan_log;
};
VaeWganResult train_vae_wgan_pipeline(const TrainingSet& data,
                                      const TrainConfig& cfg, const TrainIO& io);

struct LatentSpec {
  LatentMode mode = LatentMode::kStandardNormal;
  const Checkpoint* moments = nullptr;  // required for learned_moments
};

/// Samples n tiles from a generator checkpoint, denormalized to [0,255].
/// Deterministic for a fixed seed.
std::vector<Heightmap> generate(const Checkpoint& gen_ckpt, const LatentSpec& latent,
                                int n, uint64_t seed);

/// Rebuilds the generator network a checkpoint describes (used by generate
/// and by tools that need to poke at trained weights).
Network generator_from_checkpoint(const Checkpoint& ckpt, Rng& rng,
                                  std::shared_ptr<double> alpha = nullptr);

}  // namespace terragan
