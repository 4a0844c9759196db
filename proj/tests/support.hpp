#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "amcnet/dataset.hpp"
#include "amcnet/rng.hpp"

namespace amcnet::test {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("amcnet-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Writes train and t10k IDX files of 28x28 images. Class c lights up row
/// 2c + 1 (plus noise), so a small net can tell the classes apart.
inline std::filesystem::path write_fake_mnist(const std::string& name, std::size_t train, std::size_t test,
                                              int classes = 10) {
  const auto dir = scratch_dir(name);
  Rng rng(99);
  auto write = [&](const char* images, const char* labels, std::size_t n) {
    std::vector<std::uint8_t> px(n * 784), lb(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
      lb[i] = static_cast<std::uint8_t>(c);
      for (std::size_t k = 0; k < 784; ++k) px[i * 784 + k] = static_cast<std::uint8_t>(rng.below(40));
      for (std::size_t k = 0; k < 28; ++k) px[i * 784 + (2 * c + 1) * 28 + k] = 255;
    }
    write_mnist_idx(dir / images, dir / labels, px, lb, 28, 28);
  };
  write("train-images-idx3-ubyte", "train-labels-idx1-ubyte", train);
  write("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", test);
  return dir;
}

}  // namespace amcnet::test
