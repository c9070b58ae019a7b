#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "swp/validation/lexicons.hpp"

namespace swp::test {

inline std::filesystem::path data_dir() { return SWP_DEFAULT_DATA_DIR; }
inline std::filesystem::path test_data_dir() { return SWP_TEST_DATA_DIR; }

inline std::shared_ptr<const validation::Lexicons> lexicons() {
  static const auto lx =
      std::make_shared<const validation::Lexicons>(validation::Lexicons::load(data_dir() / "lexicons"));
  return lx;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() / ("swp-" + tag + "-" + std::to_string(rd()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace swp::test
