#include "terragan/trainers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>

#include "terragan/builders.hpp"
#include "terragan/errors.hpp"
#include "terragan/losses.hpp"
#include "terragan/optimizer.hpp"

namespace terragan {
namespace {

uint64_t sub_seed(uint64_t seed, uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void check_finite(double v, const char* what, int epoch) {
  if (!std::isfinite(v))
    throw TrainingAborted(std::string(what) + " went non-finite at epoch " +
                          std::to_string(epoch));
}

/// Endless shuffled pass over the tile indices; reshuffles on wrap.
class BatchStream {
 public:
  BatchStream(int n, Rng rng) : order_(static_cast<size_t>(n)), rng_(rng) {
    for (int i = 0; i < n; ++i) order_[static_cast<size_t>(i)] = i;
    reshuffle();
  }

  void fill(const Tensor& tiles, Tensor& batch) {
    const int64_t px = tiles.per_sample();
    for (int i = 0; i < batch.n; ++i) {
      if (cursor_ == order_.size()) reshuffle();
      int idx = order_[cursor_++];
      std::copy_n(tiles.sample(idx), px, batch.sample(i));
    }
  }

 private:
  void reshuffle() {
    for (size_t i = order_.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(rng_.uniform_index(i));
      std::swap(order_[i - 1], order_[j]);
    }
    cursor_ = 0;
  }

  std::vector<int> order_;
  size_t cursor_ = 0;
  Rng rng_;
};

Tensor sample_normal(int n, int dim, Rng& rng) {
  Tensor z(n, dim, 1, 1);
  for (float& v : z.v) v = static_cast<float>(rng.normal());
  return z;
}

Tensor concat_batches(const Tensor& a, const Tensor& b) {
  Tensor out(a.n + b.n, a.c, a.h, a.w);
  std::copy(a.v.begin(), a.v.end(), out.v.begin());
  std::copy(b.v.begin(), b.v.end(), out.v.begin() + a.v.size());
  return out;
}

std::string fmt_epoch(int epoch) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05d", epoch);
  return buf;
}

void write_ckpt(const TrainIO& io, const std::string& name, Network& net,
                const std::map<std::string, std::string>& meta) {
  if (io.out_dir.empty()) return;
  std::filesystem::create_directories(io.out_dir);
  save_checkpoint(snapshot_network(net, meta), io.out_dir / name);
}

void write_logs(const TrainIO& io, const TrainLog& log, const std::string& stem) {
  if (io.out_dir.empty()) return;
  std::filesystem::create_directories(io.out_dir);
  log.write_csv(io.out_dir / (stem + ".csv"));
  log.write_timing_csv(io.out_dir / (stem + "_time.csv"));
}

int effective_batch(int requested, int corpus_size) {
  if (corpus_size < 1) throw DataError("empty corpus");
  return std::min(requested, corpus_size);
}

/// Nearest-neighbor half-resolution view of a normalized tile stack, using
/// the same center convention as downscale_nn.
Tensor downsample_nn_tensor(const Tensor& x) {
  Tensor y(x.n, x.c, x.h / 2, x.w / 2);
  for (int i = 0; i < x.n; ++i) {
    for (int c = 0; c < x.c; ++c) {
      const float* src = x.sample(i) + static_cast<int64_t>(c) * x.h * x.w;
      float* dst = y.sample(i) + static_cast<int64_t>(c) * y.h * y.w;
      for (int r = 0; r < y.h; ++r)
        for (int col = 0; col < y.w; ++col)
          dst[static_cast<int64_t>(r) * y.w + col] =
              src[static_cast<int64_t>(2 * r + 1) * x.w + (2 * col + 1)];
    }
  }
  return y;
}

}  // namespace

TrainingSet to_training_set(const std::vector<Heightmap>& tiles, NormRange range) {
  if (tiles.empty()) throw DataError("empty corpus");
  const int s = tiles.front().width;
  for (const Heightmap& t : tiles)
    if (t.width != s || t.height != s)
      throw DataError("corpus tiles must share one size");
  TrainingSet set;
  set.range = range;
  set.tiles = Tensor(static_cast<int>(tiles.size()), 1, s, s);
  for (size_t i = 0; i < tiles.size(); ++i) {
    std::vector<float> norm = normalize(tiles[i], range);
    std::copy(norm.begin(), norm.end(), set.tiles.sample(static_cast<int>(i)));
  }
  return set;
}

// ----------------------------------------------------------- instance noise

Tensor InstanceNoise::apply(const Tensor& x, Rng& rng) {
  Tensor y = x;
  clamped_.assign(x.v.size(), 0);
  if (factor_ == 0.0) return y;
  const float f = static_cast<float>(factor_);
  for (size_t i = 0; i < y.v.size(); ++i) {
    float v = y.v[i] + f * static_cast<float>(rng.normal());
    if (v < lo_) {
      v = lo_;
      clamped_[i] = 1;
    } else if (v > hi_) {
      v = hi_;
      clamped_[i] = 1;
    }
    y.v[i] = v;
  }
  return y;
}

Tensor InstanceNoise::backward(const Tensor& dy) const {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.v.size(); ++i)
    if (clamped_[i]) dx.v[i] = 0.0f;
  return dx;
}

Tensor apply_instance_noise(const Tensor& batch, double factor, Rng& rng,
                            float lo, float hi) {
  InstanceNoise op(factor, lo, hi);
  return op.apply(batch, rng);
}

// -------------------------------------------------------------------- dcgan

TrainLog train_dcgan(const TrainingSet& data, const TrainConfig& cfg,
                     const TrainIO& io) {
  cfg.validate();
  const int s = data.tile_px();
  BuildOptions opts{cfg.width_div, cfg.d_dropout, true};
  ModelSpec g_spec = build_dcgan_generator(cfg.latent_dim, s, opts);
  ModelSpec d_spec = build_dcgan_discriminator(s, opts);

  Rng g_init(sub_seed(cfg.seed, 1));
  Rng d_init(sub_seed(cfg.seed, 2));
  Network g = Network::materialize(g_spec, g_init);
  Network d = Network::materialize(d_spec, d_init);
  g.set_dropout_seed(sub_seed(cfg.seed, 3));
  d.set_dropout_seed(sub_seed(cfg.seed, 4));
  Rng shuffle_rng(sub_seed(cfg.seed, 5));
  Rng latent_rng(sub_seed(cfg.seed, 6));
  Rng noise_rng(sub_seed(cfg.seed, 7));

  AdamOpt opt_g(g.trainable_params(), cfg.lr, cfg.adam_beta1);
  AdamOpt opt_d(d.trainable_params(), cfg.lr, cfg.adam_beta1);

  const int bs = effective_batch(cfg.batch_size, data.size());
  const int nb = data.size() / bs;
  BatchStream stream(data.size(), shuffle_rng);

  const std::map<std::string, std::string> g_meta{
      {"model_id", "dcgan-g"},
      {"image_out", std::to_string(s)},
      {"width_div", std::to_string(cfg.width_div)},
      {"latent_dim", std::to_string(cfg.latent_dim)},
      {"range", "tanh"}};
  const std::map<std::string, std::string> d_meta{
      {"model_id", "dcgan-d"},
      {"image_out", std::to_string(s)},
      {"width_div", std::to_string(cfg.width_div)}};

  TrainLog log;
  const float real_target = real_label_target(cfg.label_smoothing_beta);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    const double nf = cfg.noise_schedule == NoiseSchedule::kNone
                          ? 0.0
                          : noise_factor(cfg.noise_schedule, epoch, cfg.epochs);
    double sum_d = 0.0, sum_g = 0.0;
    Tensor real(bs, 1, s, s);
    for (int b = 0; b < nb; ++b) {
      // Discriminator step: one update on the real minibatch, one on the
      // fake minibatch, so batch statistics stay per-population.
      stream.fill(data.tiles, real);
      Tensor real_in = apply_instance_noise(real, nf, noise_rng, -1, 1);
      std::vector<float> real_targets(static_cast<size_t>(bs), real_target);
      Tensor probs_r = d.forward(real_in, true);
      ScalarLoss dl_real = bce_loss(probs_r, real_targets);
      check_finite(dl_real.loss, "discriminator loss", epoch);
      d.zero_grads();
      d.backward(dl_real.grad);
      opt_d.step();

      Tensor z = sample_normal(bs, cfg.latent_dim, latent_rng);
      Tensor fake = g.forward(z, false);
      Tensor fake_in = apply_instance_noise(fake, nf, noise_rng, -1, 1);
      std::vector<float> fake_targets(static_cast<size_t>(bs), 0.0f);
      Tensor probs_f = d.forward(fake_in, true);
      ScalarLoss dl_fake = bce_loss(probs_f, fake_targets);
      check_finite(dl_fake.loss, "discriminator loss", epoch);
      d.zero_grads();
      d.backward(dl_fake.grad);
      opt_d.step();
      sum_d += 0.5 * (dl_real.loss + dl_fake.loss);

      // Generator step: fool the discriminator with target 1.
      Tensor z2 = sample_normal(bs, cfg.latent_dim, latent_rng);
      Tensor fake2 = g.forward(z2, true);
      InstanceNoise noise_op(nf, -1.0f, 1.0f);
      Tensor fake2_noised = noise_op.apply(fake2, noise_rng);
      std::vector<float> ones(static_cast<size_t>(bs), 1.0f);
      Tensor probs2 = d.forward(fake2_noised, true);
      ScalarLoss gl = bce_loss(probs2, ones);
      check_finite(gl.loss, "generator loss", epoch);
      g.zero_grads();
      d.zero_grads();
      Tensor d_fake = d.backward(gl.grad);
      g.backward(noise_op.backward(d_fake));
      opt_g.step();
      sum_g += gl.loss;
    }
    log.add(epoch,
            {{"loss_d", sum_d / nb}, {"loss_g", sum_g / nb}, {"noise_factor", nf}},
            elapsed_s(t0));
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0 &&
        epoch != cfg.epochs) {
      write_ckpt(io, "g_e" + fmt_epoch(epoch) + ".ckpt", g, g_meta);
      write_ckpt(io, "d_e" + fmt_epoch(epoch) + ".ckpt", d, d_meta);
    }
  }
  write_ckpt(io, "g_final.ckpt", g, g_meta);
  write_ckpt(io, "d_final.ckpt", d, d_meta);
  write_logs(io, log, "train_log");
  return log;
}

// ---------------------------------------------------------------- wgan core

namespace {

struct WganLoopParams {
  int epochs = 0;
  int batch_size = 64;
  double lr = 0.0005;
  double clip_c = 0.1;
  int n_critic = 5;
  uint64_t seed = 0;
  int checkpoint_every = 50;
  std::shared_ptr<double> alpha;  // set per epoch when non-null
  std::string suffix;             // log/checkpoint name suffix ("", "_low", ...)
  std::map<std::string, std::string> g_meta, c_meta;
  const TrainHooks* hooks = nullptr;
};

TrainLog run_wgan_loop(Network& g, Network& c, const Tensor& tiles,
                       const std::function<Tensor(int)>& sample_latent,
                       const WganLoopParams& p, const TrainIO& io) {
  RmsPropOpt opt_g(g.trainable_params(), p.lr);
  RmsPropOpt opt_c(c.trainable_params(), p.lr);
  Rng shuffle_rng(sub_seed(p.seed, 11));

  const int bs = effective_batch(p.batch_size, tiles.n);
  const int nb = tiles.n / bs;
  BatchStream stream(tiles.n, shuffle_rng);

  TrainLog log;
  for (int epoch = 1; epoch <= p.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    if (p.alpha) {
      *p.alpha = p.epochs > 1
                     ? static_cast<double>(epoch - 1) / (p.epochs - 1)
                     : 0.0;
    }
    double sum_real = 0.0, sum_fake = 0.0, sum_gap = 0.0, sum_g = 0.0;
    int critic_updates = 0;
    Tensor real(bs, 1, tiles.h, tiles.w);
    for (int b = 0; b < nb; ++b) {
      // The critic trains n_critic times more than the generator.
      for (int j = 0; j < p.n_critic; ++j) {
        stream.fill(tiles, real);
        Tensor z = sample_latent(bs);
        Tensor fake = g.forward(z, false);
        Tensor scores = c.forward(concat_batches(real, fake), true);
        std::span<const float> sr(scores.v.data(), static_cast<size_t>(bs));
        std::span<const float> sf(scores.v.data() + bs, static_cast<size_t>(bs));
        WassersteinLosses wl = wasserstein_losses(sr, sf);
        check_finite(wl.critic_loss, "critic loss", epoch);
        Tensor dscores(2 * bs, 1, 1, 1);
        const float unit = 1.0f / bs;
        for (int i = 0; i < bs; ++i) {
          dscores.v[static_cast<size_t>(i)] = -unit;       // real: raise score
          dscores.v[static_cast<size_t>(bs + i)] = unit;   // fake: lower score
        }
        c.zero_grads();
        c.backward(dscores);
        opt_c.step();
        clip_weights(c.trainable_params(), p.clip_c);
        sum_real += wl.estimate_real;
        sum_fake += wl.estimate_fake;
        sum_gap += wl.gap;
        ++critic_updates;
        if (p.hooks && p.hooks->on_critic_update) p.hooks->on_critic_update();
      }
      // Generator step.
      Tensor z = sample_latent(bs);
      Tensor fake = g.forward(z, true);
      Tensor scores = c.forward(fake, true);
      double g_estimate = 0.0;
      for (int i = 0; i < bs; ++i) g_estimate += scores.v[static_cast<size_t>(i)];
      g_estimate /= bs;
      check_finite(g_estimate, "generator estimate", epoch);
      Tensor dscores(bs, 1, 1, 1);
      const float unit = -1.0f / bs;  // maximize mean critic score on fakes
      for (float& v : dscores.v) v = unit;
      g.zero_grads();
      c.zero_grads();
      Tensor dfake = c.backward(dscores);
      g.backward(dfake);
      opt_g.step();
      sum_g += g_estimate;
      if (p.hooks && p.hooks->on_generator_update) p.hooks->on_generator_update();
    }
    std::vector<std::pair<std::string, double>> metrics{
        {"west_real", sum_real / critic_updates},
        {"west_fake", sum_fake / critic_updates},
        {"west_gap", sum_gap / critic_updates},
        {"west_g", sum_g / nb}};
    if (p.alpha) metrics.emplace_back("alpha", *p.alpha);
    log.add(epoch, std::move(metrics), elapsed_s(t0));
    if (p.checkpoint_every > 0 && epoch % p.checkpoint_every == 0 &&
        epoch != p.epochs) {
      write_ckpt(io, "g" + p.suffix + "_e" + fmt_epoch(epoch) + ".ckpt", g, p.g_meta);
      write_ckpt(io, "c" + p.suffix + "_e" + fmt_epoch(epoch) + ".ckpt", c, p.c_meta);
    }
  }
  write_ckpt(io, "g" + p.suffix + "_final.ckpt", g, p.g_meta);
  write_ckpt(io, "c" + p.suffix + "_final.ckpt", c, p.c_meta);
  write_logs(io, log, "train_log" + p.suffix);
  return log;
}

std::map<std::string, std::string> gen_meta(const std::string& model_id, int out,
                                            const TrainConfig& cfg,
                                            const std::string& range,
                                            int high_res = 0, double alpha = -1.0) {
  std::map<std::string, std::string> m{
      {"model_id", model_id},
      {"image_out", std::to_string(out)},
      {"width_div", std::to_string(cfg.width_div)},
      {"latent_dim", std::to_string(cfg.latent_dim)},
      {"range", range}};
  if (high_res > 0) m["high_res"] = std::to_string(high_res);
  if (alpha >= 0.0) m["alpha"] = format_double(alpha);
  return m;
}

std::function<Tensor(int)> normal_latent(int dim, uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [dim, rng](int n) { return sample_normal(n, dim, *rng); };
}

std::function<Tensor(int)> moments_latent(const Checkpoint& moments,
                                          uint64_t seed) {
  const Tensor* mu = moments.find("mu");
  const Tensor* sigma = moments.find("sigma");
  if (mu == nullptr || sigma == nullptr)
    throw DataError("moment bank must contain tensors mu and sigma");
  if (!mu->same_shape(*sigma) || mu->n < 1)
    throw DataError("malformed moment bank");
  auto rng = std::make_shared<Rng>(seed);
  // Copies of the bank keep the sampler self-contained.
  auto mu_copy = std::make_shared<Tensor>(*mu);
  auto sigma_copy = std::make_shared<Tensor>(*sigma);
  const int dim = mu->c;
  return [rng, mu_copy, sigma_copy, dim](int n) {
    Tensor z(n, dim, 1, 1);
    for (int i = 0; i < n; ++i) {
      int idx = static_cast<int>(rng->uniform_index(
          static_cast<uint64_t>(mu_copy->n)));
      const float* m = mu_copy->sample(idx);
      const float* s = sigma_copy->sample(idx);
      float* out = z.sample(i);
      for (int k = 0; k < dim; ++k)
        out[k] = m[k] + s[k] * static_cast<float>(rng->normal());
    }
    return z;
  };
}

}  // namespace

TrainLog train_wgan(const TrainingSet& data, const TrainConfig& cfg,
                    const TrainIO& io, const TrainHooks& hooks) {
  cfg.validate();
  const int s = data.tile_px();
  Rng g_init(sub_seed(cfg.seed, 1));
  Rng c_init(sub_seed(cfg.seed, 2));

  Network g, c;
  std::string g_id, c_id;
  if (cfg.arch == Arch::kProg) {
    g = Network::materialize(build_prog_stage(ProgStage::kG128, s, cfg.width_div),
                             g_init);
    c = Network::materialize(build_prog_stage(ProgStage::kC128, s, cfg.width_div),
                             c_init);
    g_id = "prog-g-high";
    c_id = "prog-c-high";
  } else {
    auto [g_spec, c_spec] = build_wgan(cfg.latent_dim, s, {cfg.width_div});
    g = Network::materialize(g_spec, g_init);
    c = Network::materialize(c_spec, c_init);
    g_id = "wgan-g";
    c_id = "wgan-c";
  }
  g.set_dropout_seed(sub_seed(cfg.seed, 3));
  c.set_dropout_seed(sub_seed(cfg.seed, 4));

  WganLoopParams p;
  p.epochs = cfg.epochs;
  p.batch_size = cfg.batch_size;
  p.lr = cfg.lr;
  p.clip_c = cfg.clip_c;
  p.n_critic = cfg.n_critic;
  p.seed = cfg.seed;
  p.checkpoint_every = cfg.checkpoint_every;
  p.g_meta = gen_meta(g_id, s, cfg, "tanh", cfg.arch == Arch::kProg ? s : 0);
  p.c_meta = {{"model_id", c_id}, {"image_out", std::to_string(s)}};
  p.hooks = &hooks;
  return run_wgan_loop(g, c, data.tiles, normal_latent(cfg.latent_dim,
                                                       sub_seed(cfg.seed, 12)),
                       p, io);
}

std::array<TrainLog, 3> train_proggan(const TrainingSet& data,
                                      const TrainConfig& cfg, const TrainIO& io) {
  cfg.validate();
  const int high = data.tile_px();
  const int div = cfg.width_div;
  Tensor low_tiles = downsample_nn_tensor(data.tiles);

  Rng g_init(sub_seed(cfg.seed, 1));
  Rng c_init(sub_seed(cfg.seed, 2));

  WganLoopParams p;
  p.batch_size = cfg.batch_size;
  p.lr = cfg.lr;
  p.clip_c = cfg.clip_c;
  p.n_critic = cfg.n_critic;
  p.checkpoint_every = cfg.checkpoint_every;

  // Stage A: the low-resolution pair trains as a plain WGAN.
  Network g_low = Network::materialize(build_prog_stage(ProgStage::kG64, high, div),
                                       g_init);
  Network c_low = Network::materialize(build_prog_stage(ProgStage::kC64, high, div),
                                       c_init);
  g_low.set_dropout_seed(sub_seed(cfg.seed, 3));
  c_low.set_dropout_seed(sub_seed(cfg.seed, 4));
  p.epochs = cfg.stage_epochs[0];
  p.seed = sub_seed(cfg.seed, 20);
  p.suffix = "_low";
  p.g_meta = gen_meta("prog-g-low", high / 2, cfg, "tanh", high);
  p.c_meta = {{"model_id", "prog-c-low"}, {"image_out", std::to_string(high / 2)}};
  TrainLog log_low =
      run_wgan_loop(g_low, c_low, low_tiles,
                    normal_latent(cfg.latent_dim, sub_seed(cfg.seed, 21)), p, io);

  // Stage B: growth networks, shared layers carried over bit-exactly.
  auto alpha = std::make_shared<double>(0.0);
  Network g_growth = Network::materialize(
      build_prog_stage(ProgStage::kGGrowth, high, div), g_init, alpha);
  Network c_growth = Network::materialize(
      build_prog_stage(ProgStage::kCGrowth, high, div), c_init, alpha);
  g_growth.copy_matching_params(g_low);
  c_growth.copy_matching_params(c_low);
  g_growth.set_dropout_seed(sub_seed(cfg.seed, 5));
  c_growth.set_dropout_seed(sub_seed(cfg.seed, 6));
  p.epochs = cfg.stage_epochs[1];
  p.seed = sub_seed(cfg.seed, 30);
  p.suffix = "_growth";
  p.alpha = alpha;
  p.g_meta = gen_meta("prog-g-growth", high, cfg, "tanh", high, 1.0);
  p.c_meta = {{"model_id", "prog-c-growth"}, {"image_out", std::to_string(high)}};
  TrainLog log_growth =
      run_wgan_loop(g_growth, c_growth, data.tiles,
                    normal_latent(cfg.latent_dim, sub_seed(cfg.seed, 31)), p, io);

  // Stage C: the full-resolution pair continues from the growth weights.
  Network g_high = Network::materialize(
      build_prog_stage(ProgStage::kG128, high, div), g_init);
  Network c_high = Network::materialize(
      build_prog_stage(ProgStage::kC128, high, div), c_init);
  g_high.copy_matching_params(g_growth);
  c_high.copy_matching_params(c_growth);
  g_high.set_dropout_seed(sub_seed(cfg.seed, 7));
  c_high.set_dropout_seed(sub_seed(cfg.seed, 8));
  p.epochs = cfg.stage_epochs[2];
  p.seed = sub_seed(cfg.seed, 40);
  p.suffix = "_high";
  p.alpha.reset();
  p.g_meta = gen_meta("prog-g-high", high, cfg, "tanh", high);
  p.c_meta = {{"model_id", "prog-c-high"}, {"image_out", std::to_string(high)}};
  TrainLog log_high =
      run_wgan_loop(g_high, c_high, data.tiles,
                    normal_latent(cfg.latent_dim, sub_seed(cfg.seed, 41)), p, io);

  return {std::move(log_low), std::move(log_growth), std::move(log_high)};
}

// ---------------------------------------------------------------------- vae

VaeTrainResult train_vae(const TrainingSet& data, const TrainConfig& cfg,
                         const TrainIO& io) {
  if (data.range != NormRange::kZeroOne)
    throw DataError("vae training expects tiles normalized to [0,1]");
  const int s = data.tile_px();
  const int epochs = cfg.variant == Variant::kVae ? cfg.epochs : cfg.vae_epochs;
  if (epochs < 1) throw UsageError("vae epochs must be >= 1");
  const double lr = cfg.variant == Variant::kVae ? cfg.lr : cfg.vae_lr;

  Rng e_init(sub_seed(cfg.seed, 1));
  Rng d_init(sub_seed(cfg.seed, 2));
  VaeEncoder enc = VaeEncoder::materialize(
      build_vae_encoder(cfg.latent_dim, s, cfg.width_div), e_init);
  Network dec = Network::materialize(
      build_vae_decoder(cfg.latent_dim, s, {cfg.width_div}), d_init);
  enc.set_dropout_seed(sub_seed(cfg.seed, 3));
  dec.set_dropout_seed(sub_seed(cfg.seed, 4));
  Rng shuffle_rng(sub_seed(cfg.seed, 5));
  Rng eps_rng(sub_seed(cfg.seed, 6));

  std::vector<Param*> all_params = enc.trainable_params();
  for (Param* pp : dec.trainable_params()) all_params.push_back(pp);
  RmsPropOpt opt(all_params, lr);

  // Optional critic-feature reconstruction: distances are measured in the
  // feature space of a fixed critic instead of pixel space.
  std::unique_ptr<Network> feature_net;
  if (cfg.recon_mode == ReconMode::kCriticFeature) {
    ModelSpec critic = build_wgan(cfg.latent_dim, s, {cfg.width_div}).second;
    ModelSpec feat;
    feat.name = "critic-features";
    feat.input = critic.input;
    for (const LayerSpec& l : critic.layers) {
      if (l.kind == LayerKind::kFlatten) break;
      feat.layers.push_back(l);
    }
    feat.output = feat.layers.back().out;
    Rng f_init(sub_seed(cfg.seed, 9));
    feature_net =
        std::make_unique<Network>(Network::materialize(feat, f_init));
  }

  const int bs = effective_batch(cfg.batch_size, data.size());
  const int nb = data.size() / bs;
  BatchStream stream(data.size(), shuffle_rng);

  TrainLog log;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    double sum_total = 0.0, sum_recon = 0.0, sum_kl = 0.0;
    Tensor x(bs, 1, s, s);
    for (int b = 0; b < nb; ++b) {
      stream.fill(data.tiles, x);
      auto [mu, logvar] = enc.forward(x, true);
      Tensor eps = sample_normal(bs, cfg.latent_dim, eps_rng);
      Tensor std_dev = logvar;
      for (float& v : std_dev.v) v = std::exp(0.5f * v);
      Tensor z = mu;
      for (size_t i = 0; i < z.v.size(); ++i)
        z.v[i] = mu.v[i] + std_dev.v[i] * eps.v[i];
      Tensor x_hat = dec.forward(z, true);

      VaeGrads grads = vae_loss_grads(x, x_hat, mu, logvar);
      double recon = grads.parts.reconstruction;
      if (feature_net) {
        // Recompute the reconstruction term in critic feature space.
        Tensor fx = feature_net->forward(x, false);
        Tensor fxh = feature_net->forward(x_hat, false);
        double fsum = 0.0;
        Tensor dfeat(fxh.n, fxh.c, fxh.h, fxh.w);
        const double inv_n = 1.0 / x.n;
        for (size_t i = 0; i < fx.v.size(); ++i) {
          double diff = static_cast<double>(fxh.v[i]) - fx.v[i];
          fsum += 0.5 * diff * diff;
          dfeat.v[i] = static_cast<float>(diff * inv_n);
        }
        recon = fsum * inv_n;
        feature_net->zero_grads();
        grads.d_xhat = feature_net->backward(dfeat);
        grads.parts.reconstruction = recon;
        grads.parts.total = recon + grads.parts.kl;
      }
      check_finite(grads.parts.total, "vae loss", epoch);

      enc.zero_grads();
      dec.zero_grads();
      Tensor dz = dec.backward(grads.d_xhat);
      Tensor dmu = grads.d_mu;
      Tensor dlogvar = grads.d_logvar;
      for (size_t i = 0; i < dz.v.size(); ++i) {
        dmu.v[i] += dz.v[i];
        dlogvar.v[i] += dz.v[i] * 0.5f * std_dev.v[i] * eps.v[i];
      }
      enc.backward(dmu, dlogvar);
      opt.step();

      sum_total += grads.parts.total;
      sum_recon += grads.parts.reconstruction;
      sum_kl += grads.parts.kl;
    }
    log.add(epoch,
            {{"vae_loss", sum_total / nb},
             {"vae_recon", sum_recon / nb},
             {"vae_kl", sum_kl / nb}},
            elapsed_s(t0));
  }

  // Capture the per-tile moments for the learned_moments latent source.
  Checkpoint moments;
  moments.meta = {{"model_id", "vae-moments"},
                  {"latent_dim", std::to_string(cfg.latent_dim)}};
  Tensor mu_bank(data.size(), cfg.latent_dim, 1, 1);
  Tensor sigma_bank(data.size(), cfg.latent_dim, 1, 1);
  const int cap_bs = std::min(64, data.size());
  for (int start = 0; start < data.size(); start += cap_bs) {
    int count = std::min(cap_bs, data.size() - start);
    Tensor batch(count, 1, s, s);
    std::copy_n(data.tiles.sample(start), batch.count(), batch.v.data());
    auto [mu, logvar] = enc.forward(batch, false);
    for (int i = 0; i < count; ++i) {
      float* mrow = mu_bank.sample(start + i);
      float* srow = sigma_bank.sample(start + i);
      const float* m = mu.sample(i);
      const float* lv = logvar.sample(i);
      for (int k = 0; k < cfg.latent_dim; ++k) {
        mrow[k] = m[k];
        srow[k] = std::exp(0.5f * lv[k]);
      }
    }
  }
  moments.tensors.emplace_back("mu", std::move(mu_bank));
  moments.tensors.emplace_back("sigma", std::move(sigma_bank));

  VaeTrainResult result;
  result.log = std::move(log);
  result.moments = std::move(moments);

  Checkpoint enc_ckpt;
  enc_ckpt.meta = {{"model_id", "vae-enc"},
                   {"image_out", std::to_string(s)},
                   {"width_div", std::to_string(cfg.width_div)},
                   {"latent_dim", std::to_string(cfg.latent_dim)}};
  for (Param* pp : enc.params()) enc_ckpt.tensors.emplace_back(pp->name, pp->value);
  result.encoder = std::move(enc_ckpt);

  Checkpoint dec_ckpt = snapshot_network(
      dec, gen_meta("vae-dec", s, cfg, "sigmoid"));
  result.decoder = std::move(dec_ckpt);

  if (!io.out_dir.empty()) {
    std::filesystem::create_directories(io.out_dir);
    save_checkpoint(result.encoder, io.out_dir / "encoder_final.ckpt");
    save_checkpoint(result.decoder, io.out_dir / "decoder_final.ckpt");
    save_checkpoint(result.moments, io.out_dir / "moments.ckpt");
    std::string stem =
        cfg.variant == Variant::kVae ? "train_log" : "train_log_vae";
    result.log.write_csv(io.out_dir / (stem + ".csv"));
    result.log.write_timing_csv(io.out_dir / (stem + "_time.csv"));
  }
  return result;
}

TrainLog train_vae_wgan(const TrainingSet& data, const TrainConfig& cfg,
                        const Checkpoint& decoder_ckpt, const Checkpoint* moments,
                        const TrainIO& io) {
  cfg.validate();
  if (data.range != NormRange::kZeroOne)
    throw DataError("vae-wgan training expects tiles normalized to [0,1]");
  const int s = data.tile_px();
  const int latent_dim =
      std::stoi(decoder_ckpt.require_meta("latent_dim"));
  if (latent_dim != cfg.latent_dim)
    throw DataError("decoder checkpoint latent_dim does not match config");

  Rng g_init(sub_seed(cfg.seed, 1));
  Rng c_init(sub_seed(cfg.seed, 2));
  Network g = Network::materialize(
      build_vae_decoder(latent_dim, s, {cfg.width_div}), g_init);
  restore_network(g, decoder_ckpt);  // bit-equal start from the decoder
  BuildOptions critic_opts{cfg.width_div, false, true};
  Network c = Network::materialize(
      build_wgan(latent_dim, s, critic_opts).second, c_init);
  g.set_dropout_seed(sub_seed(cfg.seed, 3));
  c.set_dropout_seed(sub_seed(cfg.seed, 4));

  std::function<Tensor(int)> latent;
  if (cfg.latent == LatentMode::kLearnedMoments) {
    if (moments == nullptr)
      throw DataError("learned_moments latent requires a moment bank");
    latent = moments_latent(*moments, sub_seed(cfg.seed, 12));
  } else {
    latent = normal_latent(latent_dim, sub_seed(cfg.seed, 12));
  }

  WganLoopParams p;
  p.epochs = cfg.epochs;
  p.batch_size = cfg.batch_size;
  p.lr = cfg.lr;
  p.clip_c = cfg.clip_c;
  p.n_critic = cfg.n_critic;
  p.seed = cfg.seed;
  p.checkpoint_every = cfg.checkpoint_every;
  p.g_meta = gen_meta("vae-dec", s, cfg, "sigmoid");
  p.c_meta = {{"model_id", "wgan-c"}, {"image_out", std::to_string(s)}};
  return run_wgan_loop(g, c, data.tiles, latent, p, io);
}

VaeWganResult train_vae_wgan_pipeline(const TrainingSet& data,
                                      const TrainConfig& cfg, const TrainIO& io) {
  if (cfg.vae_epochs < 1)
    throw UsageError("vae-wgan pipeline needs vae_epochs >= 1 "
                     "(or pass an existing decoder checkpoint)");
  VaeTrainResult vae = train_vae(data, cfg, io);
  VaeWganResult out;
  out.vae_log = std::move(vae.log);
  out.wgan_log = train_vae_wgan(data, cfg, vae.decoder, &vae.moments, io);
  return out;
}

// ----------------------------------------------------------------- generate

Network generator_from_checkpoint(const Checkpoint& ckpt, Rng& rng,
                                  std::shared_ptr<double> alpha) {
  const std::string& id = ckpt.require_meta("model_id");
  const int out = std::stoi(ckpt.require_meta("image_out"));
  const int div = std::stoi(ckpt.require_meta("width_div"));
  const int latent_dim = std::stoi(ckpt.require_meta("latent_dim"));

  ModelSpec spec;
  if (id == "dcgan-g" || id == "wgan-g") {
    spec = build_dcgan_generator(latent_dim, out, {div});
  } else if (id == "vae-dec") {
    spec = build_vae_decoder(latent_dim, out, {div});
  } else if (id == "prog-g-low") {
    spec = build_prog_stage(ProgStage::kG64, std::stoi(ckpt.require_meta("high_res")),
                            div);
  } else if (id == "prog-g-high") {
    spec = build_prog_stage(ProgStage::kG128, out, div);
  } else if (id == "prog-g-growth") {
    if (!alpha) {
      alpha = std::make_shared<double>(std::stod(ckpt.require_meta("alpha")));
    }
    spec = build_prog_stage(ProgStage::kGGrowth, out, div);
  } else {
    throw DataError("checkpoint is not a generator: " + id);
  }
  Network net = Network::materialize(spec, rng, alpha);
  restore_network(net, ckpt);
  return net;
}

std::vector<Heightmap> generate(const Checkpoint& gen_ckpt, const LatentSpec& latent,
                                int n, uint64_t seed) {
  if (n < 0) throw UsageError("generate: n must be >= 0");
  std::vector<Heightmap> out;
  if (n == 0) return out;

  Rng init(sub_seed(seed, 50));
  Network g = generator_from_checkpoint(gen_ckpt, init);
  const NormRange range = gen_ckpt.require_meta("range") == "sigmoid"
                              ? NormRange::kZeroOne
                              : NormRange::kMinusOneOne;
  const int latent_dim = std::stoi(gen_ckpt.require_meta("latent_dim"));

  std::function<Tensor(int)> sample;
  if (latent.mode == LatentMode::kLearnedMoments) {
    if (latent.moments == nullptr)
      throw DataError("learned latent requires a moment bank");
    sample = moments_latent(*latent.moments, sub_seed(seed, 51));
  } else {
    sample = normal_latent(latent_dim, sub_seed(seed, 51));
  }

  out.reserve(static_cast<size_t>(n));
  for (int start = 0; start < n; start += 64) {
    int count = std::min(64, n - start);
    Tensor z = sample(count);
    Tensor img = g.forward(z, false);
    for (int i = 0; i < count; ++i) {
      std::vector<float> values(img.sample(i), img.sample(i) + img.per_sample());
      out.push_back(denormalize(values, img.w, img.h, range));
    }
  }
  return out;
}

}  // namespace terragan
