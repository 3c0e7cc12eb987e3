#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "geome/model.hpp"

namespace testing_support {

inline geome::EmbeddingTable random_table(geome::Grade g, std::size_t k, std::size_t ne,
                                          std::size_t nr, std::uint64_t seed, double sd = 1.0) {
  geome::EmbeddingTable t({g, k, ne, nr, geome::Precision::f64});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  for (double& v : t.entity_data()) v = d(rng);
  for (double& v : t.relation_data()) v = d(rng);
  return t;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("geome_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream(p, std::ios::binary) << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace testing_support
