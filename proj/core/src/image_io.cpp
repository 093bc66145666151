#include "terragan/image_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "terragan/errors.hpp"

namespace terragan {
namespace {

// Reads the next whitespace/comment-delimited token of a PNM header.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

long parse_long(const std::string& tok, const char* what,
                const std::filesystem::path& path) {
  try {
    size_t pos = 0;
    long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad PGM " + std::string(what) + " in " + path.string());
  }
}

}  // namespace

Heightmap load_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open raster: " + path.string());

  std::string magic = next_token(in);
  if (magic == "P6" || magic == "P3")
    throw DataError("multi-channel image not supported: " + path.string());
  bool binary = magic == "P5";
  if (!binary && magic != "P2")
    throw DataError("not a PGM raster: " + path.string());

  long w = parse_long(next_token(in), "width", path);
  long h = parse_long(next_token(in), "height", path);
  long maxval = parse_long(next_token(in), "maxval", path);
  if (w < 1 || h < 1)
    throw DataError("zero-dimension raster: " + path.string());
  if (maxval < 1 || maxval > 65535)
    throw DataError("unsupported PGM maxval: " + path.string());

  Heightmap hm(static_cast<int>(w), static_cast<int>(h));
  hm.value_range = {0.0, static_cast<double>(maxval)};
  size_t n = hm.pixel_count();

  if (binary) {
    if (maxval < 256) {
      std::vector<uint8_t> raw(n);
      in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
      if (static_cast<size_t>(in.gcount()) != n)
        throw DataError("truncated raster: " + path.string());
      if (maxval == 255) {
        hm.pixels = std::move(raw);
      } else {
        for (size_t i = 0; i < n; ++i)
          hm.pixels[i] = static_cast<uint8_t>(
              std::lround(raw[i] * 255.0 / static_cast<double>(maxval)));
      }
    } else {
      std::vector<uint8_t> raw(2 * n);
      in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(2 * n));
      if (static_cast<size_t>(in.gcount()) != 2 * n)
        throw DataError("truncated raster: " + path.string());
      for (size_t i = 0; i < n; ++i) {
        unsigned v = static_cast<unsigned>(raw[2 * i]) << 8 | raw[2 * i + 1];
        hm.pixels[i] = static_cast<uint8_t>(
            std::lround(v * 255.0 / static_cast<double>(maxval)));
      }
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      long v = parse_long(next_token(in), "sample", path);
      if (v < 0 || v > maxval)
        throw DataError("sample out of range: " + path.string());
      hm.pixels[i] = maxval == 255
                         ? static_cast<uint8_t>(v)
                         : static_cast<uint8_t>(std::lround(
                               v * 255.0 / static_cast<double>(maxval)));
    }
  }
  return hm;
}

void save_heightmap(const Heightmap& h, const std::filesystem::path& path) {
  if (!h.valid()) throw DataError("invalid heightmap");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write raster: " + path.string());
  out << "P5\n" << h.width << " " << h.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(h.pixels.data()),
            static_cast<std::streamsize>(h.pixel_count()));
  if (!out) throw DataError("write failure: " + path.string());
}

}  // namespace terragan
