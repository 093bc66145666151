#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "terragan/schedules.hpp"

namespace terragan {

enum class Variant { kDcgan, kWgan, kProggan, kVae, kVaeWgan };
enum class Arch { kDcgan, kProg };  // network family used by wgan runs
enum class OptimizerKind { kAdam, kRmsProp };
enum class LatentMode { kStandardNormal, kLearnedMoments };
enum class ReconMode { kPixel, kCriticFeature };

struct TrainConfig {
  Variant variant = Variant::kDcgan;
  Arch arch = Arch::kDcgan;
  int epochs = 0;
  int batch_size = 64;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double lr = 0.0002;
  double adam_beta1 = 0.5;
  // Discriminator hindering.
  NoiseSchedule noise_schedule = NoiseSchedule::kNone;
  double label_smoothing_beta = 0.0;  // 0 disables one-sided smoothing
  bool d_dropout = false;
  // Critic constraints.
  double clip_c = 0.1;
  int n_critic = 5;
  // Latent input.
  LatentMode latent = LatentMode::kStandardNormal;
  int latent_dim = 100;
  // Progressive stages (low, growth, high).
  std::array<int, 3> stage_epochs{0, 0, 0};
  // VAE phase of vae / vae-wgan runs.
  int vae_epochs = 0;
  double vae_lr = 0.0003;
  ReconMode recon_mode = ReconMode::kPixel;

  uint64_t seed = 0;
  int width_div = 1;    // channel divisor; 1 is the paper-exact width
  int d_width_div = 0;  // discriminator/critic divisor; 0 follows width_div
  int checkpoint_every = 50;

  int critic_width_div() const {
    return d_width_div > 0 ? d_width_div : width_div;
  }

  void validate() const;  // throws UsageError on inconsistent settings
};

/// Reduced settings that make a preset runnable on a desk machine.
struct DeskScale {
  int epochs = 200;
  int vae_epochs = 0;
  std::array<int, 3> stage_epochs{0, 0, 0};
  int width_div = 8;
};

struct Preset {
  std::string id;  // "e1" .. "e11"
  std::string note;
  TrainConfig config;
  DeskScale desk;
};

/// The eleven experiment presets. Throws UsageError for unknown ids.
Preset preset(const std::string& id);
std::vector<std::string> preset_ids();

void apply_desk_scale(TrainConfig& cfg, const DeskScale& desk);

std::string preset_to_text(const Preset& p);
Preset preset_from_text(const std::string& text);
Preset load_preset_file(const std::filesystem::path& path);

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);
const char* latent_mode_name(LatentMode m);
const char* noise_schedule_name(NoiseSchedule s);
NoiseSchedule noise_schedule_from_name(const std::string& name);

}  // namespace terragan
