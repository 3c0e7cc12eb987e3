#pragma once

// Binary checkpoint layout (all integers and floats little-endian):
//
//   "GEOM"  u32 version  u8 grade  u8 precision(0 = f64, 1 = f32)  u8 reciprocal  u8 0
//   u64 dim_k  u64 num_entities  u64 num_relations
//   u64 n  n bytes of JSON (training configuration echo)
//   coefficients, entities then relations, [row][component][blade], f64 or f32
//   u64 count, then count x (u32 len, bytes): entity names
//   u64 count, then count x (u32 len, bytes): raw relation names

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "geome/data.hpp"
#include "geome/model.hpp"

namespace geome {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  EmbeddingTable table{ModelConfig{}};
  std::shared_ptr<const Dictionary> entities;
  std::shared_ptr<const Dictionary> relations;  // raw names
  bool reciprocal = false;
  std::string config_json = "{}";
};

// Throws std::invalid_argument when the dictionaries do not match the table.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Throws BadMagic, UnsupportedVersion, TruncatedCheckpoint or ShapeMismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copy of `table` in another precision. Narrowing rounds through float;
// widening is exact.
EmbeddingTable with_precision(const EmbeddingTable& table, Precision p);

}  // namespace geome
