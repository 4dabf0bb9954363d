#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "semreg/rng.hpp"
#include "semreg/types.hpp"

namespace semreg::test {

inline Mat3 random_spd(XorShift64Star& rng, double eig_min, double eig_max) {
  const Mat3 axes = rng.random_rotation();
  Vec3 eig;
  for (int k = 0; k < 3; ++k) eig[k] = rng.uniform(eig_min, eig_max);
  const Mat3 m = axes * eig.asDiagonal() * axes.transpose();
  return 0.5 * (m + m.transpose());
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("semreg_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
};

inline void write_bytes(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace semreg::test
