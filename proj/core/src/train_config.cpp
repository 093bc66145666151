#include "terragan/train_config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "terragan/errors.hpp"

namespace terragan {

void TrainConfig::validate() const {
  if (variant == Variant::kProggan) {
    for (int e : stage_epochs)
      if (e < 1) throw UsageError("proggan needs three positive stage epochs");
  } else if (epochs < 1) {
    throw UsageError("epochs must be >= 1");
  }
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (!(clip_c > 0.0)) throw UsageError("clip_c must be > 0");
  if (n_critic < 1) throw UsageError("n_critic must be >= 1");
  if (latent_dim < 1) throw UsageError("latent_dim must be >= 1");
  if ((variant == Variant::kVae || variant == Variant::kVaeWgan) &&
      vae_epochs < 0)
    throw UsageError("vae_epochs must be >= 0");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kDcgan: return "dcgan";
    case Variant::kWgan: return "wgan";
    case Variant::kProggan: return "proggan";
    case Variant::kVae: return "vae";
    case Variant::kVaeWgan: return "vae-wgan";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "dcgan") return Variant::kDcgan;
  if (name == "wgan") return Variant::kWgan;
  if (name == "proggan") return Variant::kProggan;
  if (name == "vae") return Variant::kVae;
  if (name == "vae-wgan" || name == "vae_wgan") return Variant::kVaeWgan;
  throw UsageError("unknown variant: " + name);
}

const char* latent_mode_name(LatentMode m) {
  return m == LatentMode::kStandardNormal ? "standard_normal" : "learned_moments";
}

const char* noise_schedule_name(NoiseSchedule s) {
  switch (s) {
    case NoiseSchedule::kNone: return "none";
    case NoiseSchedule::kSchedule1: return "1";
    case NoiseSchedule::kSchedule2: return "2";
    case NoiseSchedule::kSchedule3: return "3";
    case NoiseSchedule::kSchedule2Literal: return "2-literal";
  }
  return "?";
}

NoiseSchedule noise_schedule_from_name(const std::string& name) {
  if (name == "none") return NoiseSchedule::kNone;
  if (name == "1") return NoiseSchedule::kSchedule1;
  if (name == "2") return NoiseSchedule::kSchedule2;
  if (name == "3") return NoiseSchedule::kSchedule3;
  if (name == "2-literal") return NoiseSchedule::kSchedule2Literal;
  throw UsageError("unknown noise schedule: " + name);
}

namespace {

TrainConfig base_dcgan() {
  TrainConfig c;
  c.variant = Variant::kDcgan;
  c.epochs = 1000;
  c.optimizer = OptimizerKind::kAdam;
  c.lr = 0.0002;
  c.adam_beta1 = 0.5;
  c.latent_dim = 100;
  return c;
}

TrainConfig base_wgan() {
  TrainConfig c;
  c.variant = Variant::kWgan;
  c.optimizer = OptimizerKind::kRmsProp;
  c.lr = 0.0005;
  c.clip_c = 0.1;
  c.n_critic = 5;
  c.latent_dim = 100;
  return c;
}

TrainConfig base_vae_wgan() {
  TrainConfig c = base_wgan();
  c.variant = Variant::kVaeWgan;
  c.epochs = 1000;
  c.vae_lr = 0.0003;
  c.latent_dim = 512;
  return c;
}

}  // namespace

Preset preset(const std::string& id) {
  Preset p;
  p.id = id;
  if (id == "e1") {
    p.note = "dcgan baseline, no discriminator hindering";
    p.config = base_dcgan();
    p.desk = {200, 0, {0, 0, 0}, 8};
  } else if (id == "e2" || id == "e3" || id == "e4") {
    p.note = "dcgan with all hindering methods, noise schedule " +
             std::string(1, id[1] - 1);
    p.config = base_dcgan();
    p.config.noise_schedule = id == "e2"   ? NoiseSchedule::kSchedule1
                              : id == "e3" ? NoiseSchedule::kSchedule2
                                           : NoiseSchedule::kSchedule3;
    p.config.label_smoothing_beta = 0.2;
    p.config.d_dropout = true;
    p.desk = {200, 0, {0, 0, 0}, 8};
  } else if (id == "e5") {
    p.note = "wgan, weight clipping 0.1";
    p.config = base_wgan();
    p.config.epochs = 5000;
    p.desk = {300, 0, {0, 0, 0}, 8};
  } else if (id == "e6") {
    p.note = "wgan with the 128-resolution progressive topology";
    p.config = base_wgan();
    p.config.arch = Arch::kProg;
    p.config.epochs = 5000;
    p.desk = {300, 0, {0, 0, 0}, 8};
  } else if (id == "e7") {
    p.note = "progressively grown wgan, three equal stages";
    p.config = base_wgan();
    p.config.variant = Variant::kProggan;
    p.config.arch = Arch::kProg;
    p.config.epochs = 0;
    p.config.stage_epochs = {1650, 1650, 1650};
    p.desk = {0, 0, {100, 100, 100}, 8};
  } else if (id == "e8") {
    p.note = "vae 1000 epochs, then wgan with the trained decoder";
    p.config = base_vae_wgan();
    p.config.vae_epochs = 1000;
    p.desk = {200, 100, {0, 0, 0}, 8};
  } else if (id == "e9") {
    p.note = "vae 150 epochs, then wgan with the trained decoder";
    p.config = base_vae_wgan();
    p.config.vae_epochs = 150;
    p.desk = {200, 50, {0, 0, 0}, 8};
  } else if (id == "e10") {
    p.note = "as e9 but latent vectors drawn from the learned moments";
    p.config = base_vae_wgan();
    p.config.vae_epochs = 150;
    p.config.latent = LatentMode::kLearnedMoments;
    p.desk = {200, 50, {0, 0, 0}, 8};
  } else if (id == "e11") {
    p.note = "plain wgan for the same total budget as e9/e10";
    p.config = base_wgan();
    p.config.epochs = 1150;
    p.desk = {300, 0, {0, 0, 0}, 8};
  } else {
    throw UsageError("unknown preset: " + id);
  }
  return p;
}

std::vector<std::string> preset_ids() {
  return {"e1", "e2", "e3", "e4", "e5", "e6", "e7", "e8", "e9", "e10", "e11"};
}

void apply_desk_scale(TrainConfig& cfg, const DeskScale& desk) {
  cfg.epochs = desk.epochs;
  cfg.vae_epochs = desk.vae_epochs;
  cfg.stage_epochs = desk.stage_epochs;
  cfg.width_div = desk.width_div;
}

namespace {

std::string ints_csv(const std::array<int, 3>& a) {
  std::ostringstream os;
  os << a[0] << "," << a[1] << "," << a[2];
  return os.str();
}

std::array<int, 3> parse_ints_csv(const std::string& s) {
  std::array<int, 3> out{0, 0, 0};
  std::istringstream is(s);
  std::string tok;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(is, tok, ',')) throw UsageError("expected three integers");
    out[static_cast<size_t>(i)] = std::stoi(tok);
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string preset_to_text(const Preset& p) {
  const TrainConfig& c = p.config;
  std::ostringstream os;
  os << "preset=" << p.id << "\n";
  os << "note=" << p.note << "\n";
  os << "variant=" << variant_name(c.variant) << "\n";
  os << "arch=" << (c.arch == Arch::kDcgan ? "dcgan" : "prog") << "\n";
  os << "epochs=" << c.epochs << "\n";
  os << "stage_epochs=" << ints_csv(c.stage_epochs) << "\n";
  os << "vae_epochs=" << c.vae_epochs << "\n";
  os << "batch_size=" << c.batch_size << "\n";
  os << "optimizer=" << (c.optimizer == OptimizerKind::kAdam ? "adam" : "rmsprop")
     << "\n";
  os << "lr=" << fmt_double(c.lr) << "\n";
  os << "adam_beta1=" << fmt_double(c.adam_beta1) << "\n";
  os << "vae_lr=" << fmt_double(c.vae_lr) << "\n";
  os << "noise_schedule=" << noise_schedule_name(c.noise_schedule) << "\n";
  os << "label_smoothing_beta=" << fmt_double(c.label_smoothing_beta) << "\n";
  os << "d_dropout=" << (c.d_dropout ? "true" : "false") << "\n";
  os << "clip_c=" << fmt_double(c.clip_c) << "\n";
  os << "n_critic=" << c.n_critic << "\n";
  os << "latent=" << latent_mode_name(c.latent) << "\n";
  os << "latent_dim=" << c.latent_dim << "\n";
  os << "desk_epochs=" << p.desk.epochs << "\n";
  os << "desk_vae_epochs=" << p.desk.vae_epochs << "\n";
  os << "desk_stage_epochs=" << ints_csv(p.desk.stage_epochs) << "\n";
  os << "desk_width_div=" << p.desk.width_div << "\n";
  return os.str();
}

Preset preset_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("preset line " + std::to_string(lineno) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw UsageError(std::string("preset missing key: ") + key);
    return it->second;
  };

  Preset p;
  p.id = get("preset");
  if (auto it = kv.find("note"); it != kv.end()) p.note = it->second;
  TrainConfig& c = p.config;
  c.variant = variant_from_name(get("variant"));
  std::string arch = get("arch");
  if (arch == "dcgan") c.arch = Arch::kDcgan;
  else if (arch == "prog") c.arch = Arch::kProg;
  else throw UsageError("unknown arch: " + arch);
  c.epochs = std::stoi(get("epochs"));
  c.stage_epochs = parse_ints_csv(get("stage_epochs"));
  c.vae_epochs = std::stoi(get("vae_epochs"));
  c.batch_size = std::stoi(get("batch_size"));
  std::string opt = get("optimizer");
  if (opt == "adam") c.optimizer = OptimizerKind::kAdam;
  else if (opt == "rmsprop") c.optimizer = OptimizerKind::kRmsProp;
  else throw UsageError("unknown optimizer: " + opt);
  c.lr = std::stod(get("lr"));
  c.adam_beta1 = std::stod(get("adam_beta1"));
  c.vae_lr = std::stod(get("vae_lr"));
  c.noise_schedule = noise_schedule_from_name(get("noise_schedule"));
  c.label_smoothing_beta = std::stod(get("label_smoothing_beta"));
  c.d_dropout = get("d_dropout") == "true";
  c.clip_c = std::stod(get("clip_c"));
  c.n_critic = std::stoi(get("n_critic"));
  std::string latent = get("latent");
  if (latent == "standard_normal") c.latent = LatentMode::kStandardNormal;
  else if (latent == "learned_moments") c.latent = LatentMode::kLearnedMoments;
  else throw UsageError("unknown latent mode: " + latent);
  c.latent_dim = std::stoi(get("latent_dim"));
  p.desk.epochs = std::stoi(get("desk_epochs"));
  p.desk.vae_epochs = std::stoi(get("desk_vae_epochs"));
  p.desk.stage_epochs = parse_ints_csv(get("desk_stage_epochs"));
  p.desk.width_div = std::stoi(get("desk_width_div"));
  return p;
}

Preset load_preset_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open preset: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return preset_from_text(buf.str());
}

}  // namespace terragan
