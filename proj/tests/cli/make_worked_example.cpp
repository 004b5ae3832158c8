// Writes the hand-built worked example to <dir>: w.bsr and x.dns in f64,
// plus x_f32.dns for the kind-mismatch path.
#include <filesystem>
#include <iostream>

#include "bsrspmm/io.hpp"
#include "fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_worked_example DIR\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  bsrspmm::save(bsrspmm::testing::worked_example<double>(), dir / "w.bsr");
  bsrspmm::save(bsrspmm::DenseMatrix<double>(1, 4, {1, 1, 1, 1}), dir / "x.dns");
  bsrspmm::save(bsrspmm::DenseMatrix<float>(1, 4, {1, 1, 1, 1}), dir / "x_f32.dns");
  return 0;
}
