// Writes a synthetic elevation raster, handy for trying the pipeline without
// real elevation data: terragan-demo-raster out.pgm [size] [seed]

#include <cstdlib>
#include <iostream>
#include <string>

#include "terragan/image_io.hpp"
#include "terragan/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: terragan-demo-raster OUT.pgm [size] [seed]\n";
    return 1;
  }
  int size = argc > 2 ? std::atoi(argv[2]) : 2048;
  uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 7;
  if (size < 1) {
    std::cerr << "size must be positive\n";
    return 1;
  }
  try {
    terragan::Heightmap h = terragan::make_synthetic_raster(size, size, seed);
    terragan::save_heightmap(h, argv[1]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << "wrote " << size << "x" << size << " raster to " << argv[1] << "\n";
  return 0;
}
