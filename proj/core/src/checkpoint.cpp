#include "terragan/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "terragan/errors.hpp"

namespace terragan {
namespace {

constexpr char kMagic[4] = {'T', 'G', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t read_u32(std::istream& in, const char* what) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw DataError(std::string("corrupt checkpoint: ") + what);
  return v;
}

std::string read_str(std::istream& in, const char* what) {
  uint32_t len = read_u32(in, what);
  if (len > (1u << 20)) throw DataError("corrupt checkpoint: string too long");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw DataError(std::string("corrupt checkpoint: ") + what);
  return s;
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

const std::string& Checkpoint::require_meta(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError("checkpoint missing metadata: " + key);
  return it->second;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path.string());
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    write_str(out, k);
    write_str(out, v);
  }
  write_u32(out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    write_str(out, name);
    write_u32(out, static_cast<uint32_t>(t.n));
    write_u32(out, static_cast<uint32_t>(t.c));
    write_u32(out, static_cast<uint32_t>(t.h));
    write_u32(out, static_cast<uint32_t>(t.w));
    out.write(reinterpret_cast<const char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(float)));
  }
  if (!out) throw DataError("write failure: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a checkpoint file: " + path.string());
  if (read_u32(in, "version") != kVersion)
    throw DataError("unsupported checkpoint version: " + path.string());
  Checkpoint ckpt;
  uint32_t nmeta = read_u32(in, "meta count");
  for (uint32_t i = 0; i < nmeta; ++i) {
    std::string k = read_str(in, "meta key");
    ckpt.meta[k] = read_str(in, "meta value");
  }
  uint32_t ntensors = read_u32(in, "tensor count");
  for (uint32_t i = 0; i < ntensors; ++i) {
    std::string name = read_str(in, "tensor name");
    int n = static_cast<int>(read_u32(in, "dim n"));
    int c = static_cast<int>(read_u32(in, "dim c"));
    int h = static_cast<int>(read_u32(in, "dim h"));
    int w = static_cast<int>(read_u32(in, "dim w"));
    Tensor t(n, c, h, w);
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(float)));
    if (!in) throw DataError("corrupt checkpoint: tensor data");
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  return ckpt;
}

Checkpoint snapshot_network(Network& net,
                            const std::map<std::string, std::string>& meta) {
  Checkpoint ckpt;
  ckpt.meta = meta;
  for (Param* p : net.params()) ckpt.tensors.emplace_back(p->name, p->value);
  return ckpt;
}

void restore_network(Network& net, const Checkpoint& ckpt, bool strict) {
  for (Param* p : net.params()) {
    const Tensor* t = ckpt.find(p->name);
    if (t == nullptr) {
      if (strict) throw DataError("checkpoint missing tensor: " + p->name);
      continue;
    }
    if (!p->value.same_shape(*t))
      throw DataError("checkpoint shape mismatch for " + p->name);
    p->value.v = t->v;
  }
}

}  // namespace terragan
