#include <doctest.h>

#include <cmath>

#include "terragan/builders.hpp"
#include "terragan/errors.hpp"
#include "terragan/losses.hpp"
#include "terragan/schedules.hpp"
#include "terragan/synthetic.hpp"
#include "terragan/trainers.hpp"
#include "test_support.hpp"

using namespace terragan;

namespace {

TrainingSet tiny_corpus(int count, int size, NormRange range, uint64_t seed) {
  return to_training_set(make_synthetic_tiles(count, size, seed), range);
}

TrainConfig mini_config(Variant v) {
  TrainConfig cfg;
  cfg.variant = v;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.width_div = 16;
  cfg.latent_dim = v == Variant::kVae || v == Variant::kVaeWgan ? 32 : 100;
  cfg.checkpoint_every = 0;
  cfg.seed = 9;
  if (v == Variant::kDcgan) {
    cfg.optimizer = OptimizerKind::kAdam;
    cfg.lr = 0.0002;
  } else {
    cfg.optimizer = OptimizerKind::kRmsProp;
    cfg.lr = v == Variant::kVae ? 0.0003 : 0.0005;
  }
  cfg.n_critic = 3;
  return cfg;
}

}  // namespace

TEST_CASE("noise_factor schedules") {
  const int epochs = 1000;
  SUBCASE("schedule 1 endpoints") {
    CHECK(noise_factor(NoiseSchedule::kSchedule1, 0, epochs) == 0.0);
    CHECK(noise_factor(NoiseSchedule::kSchedule1, epochs, epochs) ==
          doctest::Approx(0.5).epsilon(1e-12));
    // Monotone non-decreasing.
    double prev = -1.0;
    for (int e = 0; e <= epochs; e += 50) {
      double f = noise_factor(NoiseSchedule::kSchedule1, e, epochs);
      CHECK(f >= prev);
      prev = f;
    }
  }
  SUBCASE("schedule 3 shape") {
    CHECK(noise_factor(NoiseSchedule::kSchedule3, 500, epochs) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(noise_factor(NoiseSchedule::kSchedule3, epochs, epochs) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(noise_factor(NoiseSchedule::kSchedule3, 250, epochs) ==
          doctest::Approx(0.25).epsilon(1e-12));
    for (int k = 0; k <= 500; k += 25)
      CHECK(noise_factor(NoiseSchedule::kSchedule3, 500 - k, epochs) ==
            doctest::Approx(noise_factor(NoiseSchedule::kSchedule3, 500 + k,
                                         epochs))
                .epsilon(1e-12));
  }
  SUBCASE("schedule 2 matches 3 before the midpoint and halves after") {
    for (int e = 0; e <= 500; e += 25)
      CHECK(noise_factor(NoiseSchedule::kSchedule2, e, epochs) ==
            doctest::Approx(noise_factor(NoiseSchedule::kSchedule3, e, epochs))
                .epsilon(1e-12));
    for (int e = 501; e <= epochs; e += 25)
      CHECK(noise_factor(NoiseSchedule::kSchedule2, e, epochs) ==
            doctest::Approx(noise_factor(NoiseSchedule::kSchedule3, e, epochs) /
                            2.0)
                .epsilon(1e-12));
  }
  SUBCASE("literal schedule 2 collapses to zero after the midpoint") {
    CHECK(noise_factor(NoiseSchedule::kSchedule2Literal, 501, epochs) == 0.0);
    CHECK(noise_factor(NoiseSchedule::kSchedule2Literal, 400, epochs) ==
          noise_factor(NoiseSchedule::kSchedule2, 400, epochs));
  }
  SUBCASE("bounds checked") {
    CHECK_THROWS_AS(noise_factor(NoiseSchedule::kSchedule1, -1, epochs), DataError);
    CHECK_THROWS_AS(noise_factor(NoiseSchedule::kSchedule1, epochs + 1, epochs),
                    DataError);
    CHECK_THROWS_AS(noise_factor(NoiseSchedule::kSchedule1, 0, 1), DataError);
  }
}

TEST_CASE("apply_instance_noise") {
  SUBCASE("factor zero leaves the batch unchanged") {
    Rng rng(1);
    Tensor x(2, 1, 4, 4);
    for (float& v : x.v) v = 0.25f;
    Tensor y = apply_instance_noise(x, 0.0, rng, -1.0f, 1.0f);
    CHECK(y.v == x.v);
  }
  SUBCASE("clamp holds the endpoints") {
    Rng rng(2);
    Tensor x(1, 1, 32, 32);
    for (float& v : x.v) v = 1.0f;
    Tensor y = apply_instance_noise(x, 0.5, rng, -1.0f, 1.0f);
    for (float v : y.v) {
      CHECK(v <= 1.0f);
      CHECK(v >= -1.0f);
    }
  }
  SUBCASE("unclamped noise std matches the factor (monte carlo)") {
    Rng rng(3);
    const double factor = 0.37;
    Tensor x(1, 1, 1000, 1000);
    Tensor y = apply_instance_noise(x, factor, rng, -1e30f, 1e30f);
    double sum = 0.0, sq = 0.0;
    for (float v : y.v) {
      sum += v;
      sq += static_cast<double>(v) * v;
    }
    double n = static_cast<double>(y.v.size());
    double std_dev = std::sqrt(sq / n - (sum / n) * (sum / n));
    CHECK(std_dev == doctest::Approx(factor).epsilon(0.05));
  }
}

TEST_CASE("wasserstein_losses algebra") {
  SUBCASE("worked example") {
    std::vector<float> real{1.0f, 3.0f};
    std::vector<float> fake{0.0f, -2.0f};
    WassersteinLosses w = wasserstein_losses(real, fake);
    CHECK(w.critic_loss == doctest::Approx(-3.0));
    CHECK(w.gap == doctest::Approx(3.0));
    CHECK(w.estimate_real == doctest::Approx(2.0));
    CHECK(w.estimate_fake == doctest::Approx(-1.0));
  }
  SUBCASE("equal scores cancel") {
    std::vector<float> s{0.5f, -0.25f, 4.0f};
    WassersteinLosses w = wasserstein_losses(s, s);
    CHECK(w.critic_loss == 0.0);
    CHECK(w.gap == 0.0);
  }
  SUBCASE("generator loss is the negated fake mean") {
    std::vector<float> fake{-4.0f};
    WassersteinLosses w = wasserstein_losses(fake, fake);
    CHECK(w.generator_loss == doctest::Approx(4.0));
  }
  SUBCASE("identities hold on random vectors") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<float> real(1 + rng.uniform_index(32));
      std::vector<float> fake(1 + rng.uniform_index(32));
      for (float& v : real) v = static_cast<float>(rng.normal() * 10);
      for (float& v : fake) v = static_cast<float>(rng.normal() * 10);
      WassersteinLosses w = wasserstein_losses(real, fake);
      CHECK(w.critic_loss == -w.gap);                  // exact IEEE identity
      CHECK(w.generator_loss == -w.estimate_fake);     // exact
      CHECK(w.gap ==
            doctest::Approx(w.estimate_real - w.estimate_fake).epsilon(1e-12));
    }
  }
  SUBCASE("empty inputs rejected") {
    std::vector<float> some{1.0f};
    CHECK_THROWS_AS(wasserstein_losses({}, some), DataError);
    CHECK_THROWS_AS(wasserstein_losses(some, {}), DataError);
  }
}

TEST_CASE("bce loss") {
  Tensor probs(4, 1, 1, 1);
  for (float& v : probs.v) v = 0.5f;
  std::vector<float> targets{1.0f, 0.0f, 1.0f, 0.0f};
  ScalarLoss l = bce_loss(probs, targets);
  CHECK(l.loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(real_label_target(0.2) == doctest::Approx(0.8f));
}

TEST_CASE("vae_loss") {
  SUBCASE("standard normal posterior has zero kl") {
    Tensor x(1, 1, 2, 2), xh(1, 1, 2, 2), mu(1, 4, 1, 1), sigma(1, 4, 1, 1);
    for (float& v : x.v) v = 0.5f;
    for (float& v : xh.v) v = 0.5f;
    for (float& v : sigma.v) v = 1.0f;
    VaeLossParts p = vae_loss(x, xh, mu, sigma);
    CHECK(p.kl == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.reconstruction == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-6));
    CHECK(p.total == doctest::Approx(p.reconstruction + p.kl));
  }
  SUBCASE("unit mean unit sigma gives kl one half") {
    Tensor x(1, 1, 1, 1), xh(1, 1, 1, 1), mu(1, 1, 1, 1), sigma(1, 1, 1, 1);
    x.v[0] = 0.5f;
    xh.v[0] = 0.5f;
    mu.v[0] = 1.0f;
    sigma.v[0] = 1.0f;
    CHECK(vae_loss(x, xh, mu, sigma).kl == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("kl is non-negative") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
      Tensor x(1, 1, 1, 1), xh(1, 1, 1, 1), mu(1, 8, 1, 1), sigma(1, 8, 1, 1);
      x.v[0] = 0.5f;
      xh.v[0] = 0.5f;
      for (float& v : mu.v) v = static_cast<float>(rng.normal() * 3);
      for (float& v : sigma.v)
        v = static_cast<float>(std::exp(rng.normal()));
      CHECK(vae_loss(x, xh, mu, sigma).kl >= -1e-9);
    }
  }
  SUBCASE("validation") {
    Tensor x(1, 1, 2, 2), bad(1, 1, 2, 1), mu(1, 1, 1, 1), sigma(1, 1, 1, 1);
    sigma.v[0] = 1.0f;
    CHECK_THROWS_AS(vae_loss(x, bad, mu, sigma), DataError);
    Tensor outside(1, 1, 2, 2);
    outside.v[0] = 1.5f;
    CHECK_THROWS_AS(vae_loss(outside, x, mu, sigma), DataError);
  }
}

TEST_CASE("train_dcgan mini run") {
  TrainingSet data = tiny_corpus(24, 32, NormRange::kMinusOneOne, 100);
  TrainConfig cfg = mini_config(Variant::kDcgan);

  SUBCASE("epoch accounting and finiteness") {
    TrainLog log = train_dcgan(data, cfg, {});
    REQUIRE(log.epochs.size() == 2);
    for (const EpochRecord& rec : log.epochs) {
      CHECK(rec.metrics.size() == 3);
      for (const auto& [name, value] : rec.metrics) CHECK(std::isfinite(value));
    }
    CHECK(log.epochs[0].metrics[0].first == "loss_d");
    CHECK(log.epochs[0].metrics[1].first == "loss_g");
  }
  SUBCASE("deterministic under a fixed seed") {
    TrainLog a = train_dcgan(data, cfg, {});
    TrainLog b = train_dcgan(data, cfg, {});
    CHECK(a.to_csv() == b.to_csv());
    cfg.seed = 10;
    TrainLog c = train_dcgan(data, cfg, {});
    CHECK(a.to_csv() != c.to_csv());
  }
  SUBCASE("noise schedule is logged") {
    cfg.noise_schedule = NoiseSchedule::kSchedule3;
    cfg.label_smoothing_beta = 0.2;
    cfg.d_dropout = true;
    TrainLog log = train_dcgan(data, cfg, {});
    CHECK(log.epochs[0].metrics[2].first == "noise_factor");
    CHECK(log.epochs[0].metrics[2].second ==
          doctest::Approx(noise_factor(NoiseSchedule::kSchedule3, 1, 2)));
  }
  SUBCASE("checkpoints land on disk") {
    tsup::TempDir dir("dcgan_io");
    cfg.checkpoint_every = 1;
    cfg.epochs = 2;
    train_dcgan(data, cfg, {dir.path()});
    CHECK(std::filesystem::exists(dir.path() / "g_final.ckpt"));
    CHECK(std::filesystem::exists(dir.path() / "d_final.ckpt"));
    CHECK(std::filesystem::exists(dir.path() / "g_e00001.ckpt"));
    CHECK(std::filesystem::exists(dir.path() / "train_log.csv"));
    CHECK(std::filesystem::exists(dir.path() / "train_log_time.csv"));
    Checkpoint g = load_checkpoint(dir.path() / "g_final.ckpt");
    CHECK(g.require_meta("model_id") == "dcgan-g");
    CHECK(g.require_meta("range") == "tanh");
  }
  SUBCASE("empty corpus rejected") {
    std::vector<Heightmap> none;
    CHECK_THROWS_AS(to_training_set(none, NormRange::kMinusOneOne), DataError);
  }
}

TEST_CASE("train_wgan mini run") {
  TrainingSet data = tiny_corpus(24, 32, NormRange::kMinusOneOne, 101);
  TrainConfig cfg = mini_config(Variant::kWgan);

  SUBCASE("critic trains n_critic times more than the generator") {
    int critic_updates = 0, gen_updates = 0;
    TrainHooks hooks;
    hooks.on_critic_update = [&] { ++critic_updates; };
    hooks.on_generator_update = [&] { ++gen_updates; };
    TrainLog log = train_wgan(data, cfg, {}, hooks);
    CHECK(gen_updates == 2 * (24 / 8));  // epochs * batches
    CHECK(critic_updates == cfg.n_critic * gen_updates);
    REQUIRE(log.epochs.size() == 2);
    CHECK(log.epochs[0].metrics[0].first == "west_real");
    CHECK(log.epochs[0].metrics[2].first == "west_gap");
    for (const auto& [name, value] : log.epochs[0].metrics) {
      CHECK(std::isfinite(value));
    }
    // west_gap == west_real - west_fake within floating tolerance.
    CHECK(log.epochs[0].metrics[2].second ==
          doctest::Approx(log.epochs[0].metrics[0].second -
                          log.epochs[0].metrics[1].second)
              .epsilon(1e-9));
  }
  SUBCASE("critic weights stay inside the clip box") {
    tsup::TempDir dir("wgan_clip");
    cfg.clip_c = 0.05;
    train_wgan(data, cfg, {dir.path()});
    Checkpoint c = load_checkpoint(dir.path() / "c_final.ckpt");
    for (const auto& [name, tensor] : c.tensors) {
      if (name.find("running_") != std::string::npos) continue;
      for (float v : tensor.v) CHECK(std::abs(v) <= 0.05f);
    }
  }
  SUBCASE("prog architecture variant runs") {
    cfg.arch = Arch::kProg;
    cfg.epochs = 1;
    TrainLog log = train_wgan(data, cfg, {});
    CHECK(log.epochs.size() == 1);
  }
  SUBCASE("exploding learning rate aborts with a diagnostic") {
    cfg.lr = 1e30;
    cfg.epochs = 3;
    CHECK_THROWS_AS(train_wgan(data, cfg, {}), TrainingAborted);
  }
}

TEST_CASE("train_proggan mini run") {
  TrainingSet data = tiny_corpus(16, 32, NormRange::kMinusOneOne, 102);
  TrainConfig cfg = mini_config(Variant::kProggan);
  cfg.stage_epochs = {2, 3, 2};

  tsup::TempDir dir("prog_io");
  auto logs = train_proggan(data, cfg, {dir.path()});
  CHECK(logs[0].epochs.size() == 2);
  CHECK(logs[1].epochs.size() == 3);
  CHECK(logs[2].epochs.size() == 2);

  // The growth stage fades alpha linearly from 0 to 1.
  const auto& growth = logs[1].epochs;
  auto alpha_of = [](const EpochRecord& rec) {
    for (const auto& [name, value] : rec.metrics)
      if (name == "alpha") return value;
    return -1.0;
  };
  CHECK(alpha_of(growth.front()) == 0.0);
  CHECK(alpha_of(growth[1]) == doctest::Approx(0.5));
  CHECK(alpha_of(growth.back()) == 1.0);

  CHECK(std::filesystem::exists(dir.path() / "train_log_low.csv"));
  CHECK(std::filesystem::exists(dir.path() / "train_log_growth.csv"));
  CHECK(std::filesystem::exists(dir.path() / "train_log_high.csv"));
  CHECK(std::filesystem::exists(dir.path() / "g_high_final.ckpt"));

  // Stage A consumed half-resolution tiles, stage C full resolution.
  Checkpoint low = load_checkpoint(dir.path() / "g_low_final.ckpt");
  CHECK(low.require_meta("image_out") == "16");
  Checkpoint high = load_checkpoint(dir.path() / "g_high_final.ckpt");
  CHECK(high.require_meta("image_out") == "32");
}

TEST_CASE("train_vae mini run") {
  TrainingSet data = tiny_corpus(24, 32, NormRange::kZeroOne, 103);
  TrainConfig cfg = mini_config(Variant::kVae);
  cfg.epochs = 3;

  SUBCASE("loss is finite and moments are captured") {
    VaeTrainResult r = train_vae(data, cfg, {});
    REQUIRE(r.log.epochs.size() == 3);
    for (const EpochRecord& rec : r.log.epochs)
      for (const auto& [name, value] : rec.metrics) CHECK(std::isfinite(value));
    const Tensor* mu = r.moments.find("mu");
    const Tensor* sigma = r.moments.find("sigma");
    REQUIRE(mu != nullptr);
    REQUIRE(sigma != nullptr);
    CHECK(mu->n == 24);
    CHECK(mu->c == cfg.latent_dim);
    CHECK(sigma->n == 24);
    for (float v : sigma->v) CHECK(v > 0.0f);
    CHECK(r.decoder.require_meta("model_id") == "vae-dec");
    CHECK(r.decoder.require_meta("range") == "sigmoid");
  }
  SUBCASE("wrong normalization rejected") {
    TrainingSet bad = tiny_corpus(8, 32, NormRange::kMinusOneOne, 5);
    CHECK_THROWS_AS(train_vae(bad, cfg, {}), DataError);
  }
  SUBCASE("critic-feature reconstruction mode trains") {
    cfg.recon_mode = ReconMode::kCriticFeature;
    cfg.epochs = 1;
    VaeTrainResult r = train_vae(data, cfg, {});
    CHECK(std::isfinite(r.log.epochs[0].metrics[0].second));
  }
}

TEST_CASE("train_vae_wgan pipeline") {
  TrainingSet data = tiny_corpus(16, 32, NormRange::kZeroOne, 104);
  TrainConfig cfg = mini_config(Variant::kVaeWgan);
  cfg.vae_epochs = 1;
  cfg.epochs = 1;
  cfg.n_critic = 2;

  SUBCASE("generator starts bit-equal to the decoder checkpoint") {
    VaeTrainResult vae = train_vae(data, cfg, {});
    // lr 0 freezes the generator; clipping touches the critic only, so the
    // final generator must still be the decoder bit for bit.
    TrainConfig frozen = cfg;
    frozen.lr = 0.0;
    tsup::TempDir dir("vaewgan_frozen");
    train_vae_wgan(data, frozen, vae.decoder, &vae.moments, {dir.path()});
    Checkpoint g = load_checkpoint(dir.path() / "g_final.ckpt");
    for (const auto& [name, tensor] : g.tensors) {
      const Tensor* src = vae.decoder.find(name);
      if (name.find("running_") != std::string::npos) continue;
      REQUIRE(src != nullptr);
      CHECK(tensor.v == src->v);
    }
  }
  SUBCASE("learned moments latent requires a bank") {
    VaeTrainResult vae = train_vae(data, cfg, {});
    cfg.latent = LatentMode::kLearnedMoments;
    CHECK_THROWS_AS(train_vae_wgan(data, cfg, vae.decoder, nullptr, {}),
                    DataError);
    TrainLog log = train_vae_wgan(data, cfg, vae.decoder, &vae.moments, {});
    CHECK(log.epochs.size() == 1);
  }
  SUBCASE("latent width mismatch rejected") {
    VaeTrainResult vae = train_vae(data, cfg, {});
    TrainConfig other = cfg;
    other.latent_dim = 64;
    CHECK_THROWS_AS(train_vae_wgan(data, other, vae.decoder, nullptr, {}),
                    DataError);
  }
  SUBCASE("full pipeline emits both logs") {
    VaeWganResult r = train_vae_wgan_pipeline(data, cfg, {});
    CHECK(r.vae_log.epochs.size() == 1);
    CHECK(r.wgan_log.epochs.size() == 1);
  }
}

TEST_CASE("generate") {
  TrainingSet data = tiny_corpus(16, 32, NormRange::kMinusOneOne, 105);
  TrainConfig cfg = mini_config(Variant::kDcgan);
  cfg.epochs = 1;
  tsup::TempDir dir("gen");
  train_dcgan(data, cfg, {dir.path()});
  Checkpoint ckpt = load_checkpoint(dir.path() / "g_final.ckpt");

  SUBCASE("n zero gives an empty list") {
    CHECK(generate(ckpt, {}, 0, 1).empty());
  }
  SUBCASE("deterministic and in range") {
    std::vector<Heightmap> a = generate(ckpt, {}, 3, 42);
    std::vector<Heightmap> b = generate(ckpt, {}, 3, 42);
    REQUIRE(a.size() == 3);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].pixels == b[i].pixels);
    std::vector<Heightmap> c = generate(ckpt, {}, 3, 43);
    bool differ = false;
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i].pixels != c[i].pixels) differ = true;
    CHECK(differ);
    for (const Heightmap& t : a) {
      CHECK(t.width == 32);
      CHECK(t.height == 32);
    }
  }
  SUBCASE("a zero-sigma moment bank collapses to the stored mean") {
    Checkpoint moments;
    moments.meta["model_id"] = "vae-moments";
    Tensor mu(1, 100, 1, 1);
    Rng rng(3);
    for (float& v : mu.v) v = static_cast<float>(rng.normal());
    Tensor sigma(1, 100, 1, 1);  // all zero
    moments.tensors.emplace_back("mu", mu);
    moments.tensors.emplace_back("sigma", sigma);
    LatentSpec latent;
    latent.mode = LatentMode::kLearnedMoments;
    latent.moments = &moments;
    std::vector<Heightmap> a = generate(ckpt, latent, 4, 7);
    // Every z equals the single stored mu, so every tile is identical.
    for (size_t i = 1; i < a.size(); ++i) CHECK(a[i].pixels == a[0].pixels);
  }
  SUBCASE("corrupt checkpoint rejected") {
    tsup::TempDir bad("badckpt");
    { std::ofstream out(bad.path() / "x.ckpt", std::ios::binary); out << "junk"; }
    CHECK_THROWS_AS(load_checkpoint(bad.path() / "x.ckpt"), DataError);
  }
}
