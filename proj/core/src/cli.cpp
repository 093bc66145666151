#include "terragan/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "terragan/builders.hpp"
#include "terragan/dataset.hpp"
#include "terragan/errors.hpp"
#include "terragan/image_io.hpp"
#include "terragan/metrics.hpp"
#include "terragan/terrain_export.hpp"
#include "terragan/trainers.hpp"

namespace terragan {
namespace {

namespace fs = std::filesystem;

fs::path resolve_out(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("TERRAGAN_OUT");
  if (env != nullptr && *env != '\0') return env;
  throw UsageError("no output directory: pass --out or set TERRAGAN_OUT");
}

// ------------------------------------------------------------ dataset-build

struct DatasetArgs {
  std::string input, out;
  int tile = 1024;
  int stride = 512;
  int rounds = 15;
  int target = 128;
  uint64_t seed = 0;
  double gamma = 0.0;  // 0 = no brightness remap
};

int cmd_dataset_build(const DatasetArgs& a) {
  Heightmap source = load_raster(a.input);
  if (a.gamma > 0.0)
    source = brightness_remap(source, BrightnessCurve::gamma(a.gamma));
  CorpusOptions opts;
  opts.rounds = a.rounds;
  opts.tile = a.tile;
  opts.stride = a.stride;
  opts.target = a.target;
  opts.seed = a.seed;
  TileCorpus corpus = build_corpus(source, opts);
  fs::path out = resolve_out(a.out);
  save_corpus(corpus, out);
  std::cout << "corpus: " << corpus.manifest.kept_count << " tiles kept of "
            << corpus.manifest.entries.size() << " candidates -> " << out.string()
            << "\n";
  return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string variant, preset_id, corpus, out;
  std::string decoder, moments_path;
  std::string noise_schedule, latent;
  int epochs = -1;
  std::array<int, 3> stage_epochs{-1, -1, -1};
  int vae_epochs = -1;
  int batch_size = -1;
  double lr = -1.0;
  double smoothing_beta = -1.0;
  double clip_c = -1.0;
  int n_critic = -1;
  int latent_dim = -1;
  int width_div = -1;
  int ckpt_every = -1;
  uint64_t seed = 0;
  bool desk_scale = false;
  bool d_dropout = false;
  bool d_dropout_set = false;
};

int cmd_train(const TrainArgs& a) {
  TrainConfig cfg;
  bool have_preset = !a.preset_id.empty();
  if (have_preset) {
    Preset p = preset(a.preset_id);
    cfg = p.config;
    if (a.desk_scale) apply_desk_scale(cfg, p.desk);
  }
  if (!a.variant.empty()) {
    Variant v = variant_from_name(a.variant);
    if (!have_preset) {
      // Start from the variant's built-in defaults.
      if (v == Variant::kDcgan) cfg = preset("e1").config;
      else if (v == Variant::kWgan) cfg = preset("e5").config;
      else if (v == Variant::kProggan) cfg = preset("e7").config;
      else if (v == Variant::kVaeWgan) cfg = preset("e9").config;
      else {
        cfg = preset("e9").config;
        cfg.variant = Variant::kVae;
        cfg.optimizer = OptimizerKind::kRmsProp;
        cfg.lr = 0.0003;
        cfg.epochs = cfg.vae_epochs;
      }
    }
    if (have_preset && v != cfg.variant)
      throw UsageError("--variant contradicts the preset's variant");
    cfg.variant = v;
  } else if (!have_preset) {
    throw UsageError("train needs --variant or --preset");
  }

  if (have_preset && !a.desk_scale && a.epochs < 0 &&
      cfg.variant != Variant::kProggan)
    throw UsageError("preset " + a.preset_id +
                     " carries full-length epochs; pass --epochs or --desk-scale");
  if (have_preset && !a.desk_scale && cfg.variant == Variant::kProggan &&
      a.stage_epochs[0] < 0 && a.epochs < 0)
    throw UsageError("preset " + a.preset_id +
                     " carries full-length epochs; pass --epochs, --stage-epochs "
                     "or --desk-scale");

  // Flags override preset values.
  if (a.epochs >= 0) {
    cfg.epochs = a.epochs;
    if (cfg.variant == Variant::kProggan)
      cfg.stage_epochs = {a.epochs, a.epochs, a.epochs};
  }
  if (a.stage_epochs[0] >= 0) cfg.stage_epochs = a.stage_epochs;
  if (a.vae_epochs >= 0) cfg.vae_epochs = a.vae_epochs;
  if (a.batch_size > 0) cfg.batch_size = a.batch_size;
  if (a.lr > 0.0) cfg.lr = a.lr;
  if (!a.noise_schedule.empty())
    cfg.noise_schedule = noise_schedule_from_name(a.noise_schedule);
  if (a.smoothing_beta >= 0.0) cfg.label_smoothing_beta = a.smoothing_beta;
  if (a.d_dropout_set) cfg.d_dropout = a.d_dropout;
  if (a.clip_c > 0.0) cfg.clip_c = a.clip_c;
  if (a.n_critic > 0) cfg.n_critic = a.n_critic;
  if (!a.latent.empty()) {
    if (a.latent == "normal") cfg.latent = LatentMode::kStandardNormal;
    else if (a.latent == "learned") cfg.latent = LatentMode::kLearnedMoments;
    else throw UsageError("unknown latent mode: " + a.latent);
  }
  if (a.latent_dim > 0) cfg.latent_dim = a.latent_dim;
  if (a.width_div > 0) cfg.width_div = a.width_div;
  if (a.ckpt_every >= 0) cfg.checkpoint_every = a.ckpt_every;
  cfg.seed = a.seed;
  cfg.validate();

  if (a.corpus.empty()) throw UsageError("train needs --corpus");
  TileCorpus corpus = load_corpus(a.corpus);
  const bool sigmoid_range =
      cfg.variant == Variant::kVae || cfg.variant == Variant::kVaeWgan;
  TrainingSet data = to_training_set(
      corpus.tiles, sigmoid_range ? NormRange::kZeroOne : NormRange::kMinusOneOne);

  TrainIO io;
  io.out_dir = resolve_out(a.out);

  switch (cfg.variant) {
    case Variant::kDcgan: {
      TrainLog log = train_dcgan(data, cfg, io);
      std::cout << "dcgan: " << log.epochs.size() << " epochs -> "
                << io.out_dir.string() << "\n";
      break;
    }
    case Variant::kWgan: {
      TrainLog log = train_wgan(data, cfg, io);
      std::cout << "wgan: " << log.epochs.size() << " epochs -> "
                << io.out_dir.string() << "\n";
      break;
    }
    case Variant::kProggan: {
      auto logs = train_proggan(data, cfg, io);
      std::cout << "proggan: stages " << logs[0].epochs.size() << "+"
                << logs[1].epochs.size() << "+" << logs[2].epochs.size()
                << " epochs -> " << io.out_dir.string() << "\n";
      break;
    }
    case Variant::kVae: {
      VaeTrainResult r = train_vae(data, cfg, io);
      std::cout << "vae: " << r.log.epochs.size() << " epochs -> "
                << io.out_dir.string() << "\n";
      break;
    }
    case Variant::kVaeWgan: {
      if (!a.decoder.empty()) {
        Checkpoint dec = load_checkpoint(a.decoder);
        std::optional<Checkpoint> moments;
        if (!a.moments_path.empty()) moments = load_checkpoint(a.moments_path);
        if (cfg.latent == LatentMode::kLearnedMoments && !moments)
          throw UsageError("learned latent needs --moments");
        TrainLog log = train_vae_wgan(data, cfg, dec,
                                      moments ? &*moments : nullptr, io);
        std::cout << "vae-wgan: " << log.epochs.size() << " epochs -> "
                  << io.out_dir.string() << "\n";
      } else {
        VaeWganResult r = train_vae_wgan_pipeline(data, cfg, io);
        std::cout << "vae-wgan: vae " << r.vae_log.epochs.size() << " + wgan "
                  << r.wgan_log.epochs.size() << " epochs -> "
                  << io.out_dir.string() << "\n";
      }
      break;
    }
  }
  return 0;
}

// ----------------------------------------------------------------- generate

struct GenerateArgs {
  std::string checkpoint, out, latent = "normal", moments_path;
  int n = 16;
  int columns = 4;
  uint64_t seed = 0;
};

int cmd_generate(const GenerateArgs& a) {
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  LatentSpec latent;
  std::optional<Checkpoint> moments;
  if (a.latent == "learned") {
    latent.mode = LatentMode::kLearnedMoments;
    if (a.moments_path.empty()) throw UsageError("learned latent needs --moments");
    moments = load_checkpoint(a.moments_path);
    latent.moments = &*moments;
  } else if (a.latent != "normal") {
    throw UsageError("unknown latent mode: " + a.latent);
  }
  std::vector<Heightmap> tiles = generate(ckpt, latent, a.n, a.seed);
  fs::path out = resolve_out(a.out);
  fs::create_directories(out);
  for (size_t i = 0; i < tiles.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "tile_%03zu.pgm", i);
    save_heightmap(tiles[static_cast<size_t>(i)], out / name);
  }
  if (!tiles.empty())
    save_heightmap(montage(tiles, a.columns), out / "montage.pgm");
  std::cout << "generated " << tiles.size() << " tiles -> " << out.string() << "\n";
  return 0;
}

// --------------------------------------------------------------------- plot

struct PlotArgs {
  std::string log, out, summary;
};

int cmd_plot(const PlotArgs& a) {
  std::vector<CurveSeries> series = load_log(a.log);
  if (series.empty()) throw DataError("log has no metrics: " + a.log);
  fs::path out = a.out;
  render_curves(series, out);
  fs::path summary_path = a.summary.empty()
                              ? out.parent_path() / (out.stem().string() + "_summary.json")
                              : fs::path(a.summary);
  std::ofstream sum(summary_path, std::ios::binary);
  if (!sum) throw DataError("cannot write summary: " + summary_path.string());
  sum << summarize(series);
  std::cout << "plot -> " << out.string() << ", summary -> "
            << summary_path.string() << "\n";
  return 0;
}

// -------------------------------------------------------------- export-mesh

struct MeshArgs {
  std::string heightmap, out;
  double scale = 0.0;  // 0: default 0.25 * width
};

int cmd_export_mesh(const MeshArgs& a) {
  Heightmap h = load_raster(a.heightmap);
  float scale = a.scale > 0.0 ? static_cast<float>(a.scale)
                              : 0.25f * static_cast<float>(h.width);
  TerrainMesh mesh = heightmap_to_mesh(h, scale);
  save_mesh_obj(mesh, a.out);
  std::cout << "mesh: " << mesh.vertices.size() << " vertices, "
            << mesh.faces.size() << " faces -> " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------------ inspect

int cmd_inspect(const std::string& model) {
  if (model == "dcgan-g") {
    std::cout << spec_table(build_dcgan_generator());
  } else if (model == "dcgan-d") {
    std::cout << spec_table(build_dcgan_discriminator());
  } else if (model == "wgan-g") {
    std::cout << spec_table(build_wgan().first);
  } else if (model == "wgan-c") {
    std::cout << spec_table(build_wgan().second);
  } else if (model == "g64") {
    std::cout << spec_table(build_prog_stage(ProgStage::kG64));
  } else if (model == "c64") {
    std::cout << spec_table(build_prog_stage(ProgStage::kC64));
  } else if (model == "g128") {
    std::cout << spec_table(build_prog_stage(ProgStage::kG128));
  } else if (model == "c128") {
    std::cout << spec_table(build_prog_stage(ProgStage::kC128));
  } else if (model == "growth") {
    std::cout << spec_table(build_prog_stage(ProgStage::kGGrowth));
    std::cout << spec_table(build_prog_stage(ProgStage::kCGrowth));
  } else if (model == "vae-enc") {
    std::cout << spec_table(build_vae_encoder());
  } else if (model == "vae-dec") {
    std::cout << spec_table(build_vae_decoder());
  } else {
    throw UsageError("unknown model: " + model +
                     " (expected dcgan-g, dcgan-d, wgan-g, wgan-c, g64, c64, "
                     "g128, c128, growth, vae-enc or vae-dec)");
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"heightmap corpus building, adversarial training and export"};
  app.require_subcommand(1);

  DatasetArgs da;
  CLI::App* dataset = app.add_subcommand("dataset-build",
                                         "build a tile corpus from a raster");
  dataset->add_option("--input", da.input, "source grayscale raster (PGM)")
      ->required();
  dataset->add_option("--tile", da.tile, "crop window size");
  dataset->add_option("--stride", da.stride, "sliding window stride");
  dataset->add_option("--rounds", da.rounds, "augmentation rounds");
  dataset->add_option("--target", da.target, "downscale target size");
  dataset->add_option("--seed", da.seed, "rng seed");
  dataset->add_option("--gamma", da.gamma, "brightness gamma (0 = off)");
  dataset->add_option("--out", da.out, "output directory");

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "train a model variant");
  train->add_option("--variant", ta.variant, "dcgan|wgan|proggan|vae|vae-wgan");
  train->add_option("--preset", ta.preset_id, "experiment preset e1..e11");
  train->add_option("--corpus", ta.corpus, "corpus directory");
  train->add_option("--epochs", ta.epochs, "epoch count override");
  train->add_option("--stage-epochs", ta.stage_epochs,
                    "proggan stage epochs (three values)");
  train->add_option("--vae-epochs", ta.vae_epochs, "vae phase epochs");
  train->add_option("--batch-size", ta.batch_size, "minibatch size");
  train->add_option("--lr", ta.lr, "learning rate override");
  train->add_option("--noise-schedule", ta.noise_schedule,
                    "instance noise schedule: none|1|2|3|2-literal");
  train->add_option("--smoothing-beta", ta.smoothing_beta,
                    "one-sided label smoothing beta");
  train->add_flag("--d-dropout,!--no-d-dropout", ta.d_dropout,
                  "dropout after each discriminator LeakyReLU");
  train->add_option("--clip-c", ta.clip_c, "critic weight clip constant");
  train->add_option("--n-critic", ta.n_critic, "critic updates per generator update");
  train->add_option("--latent", ta.latent, "latent source: normal|learned");
  train->add_option("--latent-dim", ta.latent_dim, "latent width");
  train->add_option("--width-div", ta.width_div, "channel width divisor");
  train->add_option("--ckpt-every", ta.ckpt_every, "checkpoint cadence in epochs");
  train->add_option("--seed", ta.seed, "rng seed");
  train->add_option("--decoder", ta.decoder, "decoder checkpoint (vae-wgan)");
  train->add_option("--moments", ta.moments_path, "moment bank checkpoint");
  train->add_flag("--desk-scale", ta.desk_scale,
                  "shrink the preset to desk-scale epochs and widths");
  train->add_option("--out", ta.out, "output directory");

  GenerateArgs ga;
  CLI::App* gen = app.add_subcommand("generate", "sample tiles from a checkpoint");
  gen->add_option("--checkpoint", ga.checkpoint, "generator checkpoint")->required();
  gen->add_option("--n", ga.n, "number of tiles");
  gen->add_option("--latent", ga.latent, "latent source: normal|learned");
  gen->add_option("--moments", ga.moments_path, "moment bank checkpoint");
  gen->add_option("--columns", ga.columns, "montage columns");
  gen->add_option("--seed", ga.seed, "rng seed");
  gen->add_option("--out", ga.out, "output directory");

  PlotArgs pa;
  CLI::App* plot = app.add_subcommand("plot", "render training curves");
  plot->add_option("--log", pa.log, "train log csv")->required();
  plot->add_option("--out", pa.out, "output svg path")->required();
  plot->add_option("--summary", pa.summary, "summary json path");

  MeshArgs ma;
  CLI::App* mesh = app.add_subcommand("export-mesh", "heightmap to 3d mesh");
  mesh->add_option("--heightmap", ma.heightmap, "heightmap image")->required();
  mesh->add_option("--scale", ma.scale, "peak height in tile units");
  mesh->add_option("--out", ma.out, "output obj path")->required();

  std::string inspect_model;
  CLI::App* inspect = app.add_subcommand("inspect", "print a network layer table");
  inspect->add_option("--model", inspect_model, "network to print")->required();

  try {
    app.parse(argc, argv);
    if (dataset->parsed()) return cmd_dataset_build(da);
    if (train->parsed()) {
      ta.d_dropout_set = train->count("--d-dropout") > 0 ||
                         train->count("--no-d-dropout") > 0;
      return cmd_train(ta);
    }
    if (gen->parsed()) return cmd_generate(ga);
    if (plot->parsed()) return cmd_plot(pa);
    if (mesh->parsed()) return cmd_export_mesh(ma);
    if (inspect->parsed()) return cmd_inspect(inspect_model);
    throw UsageError("no subcommand");
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const TrainingAborted& e) {
    std::cerr << "training aborted: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace terragan
