#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "geome/multivector.hpp"

namespace geome {

using ga::Grade;

enum class Precision { f32, f64 };

struct ModelConfig {
  Grade grade = Grade::two;
  std::size_t dim_k = 1;
  std::size_t num_entities = 1;
  std::size_t num_relations = 1;
  Precision precision = Precision::f64;

  std::size_t blades() const { return ga::blade_count(grade); }
  // Doubles per embedding row: k multivectors of 2^grade coefficients.
  std::size_t row_size() const { return dim_k * blades(); }
  std::size_t parameter_count() const { return (num_entities + num_relations) * row_size(); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Entity and relation embeddings stored row-major as [row][component][blade].
// Scoring only reads; callers serialize writes.
class EmbeddingTable {
 public:
  // Zero-initialized. Throws std::invalid_argument on zero dimensions.
  explicit EmbeddingTable(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  Grade grade() const { return config_.grade; }
  std::size_t num_entities() const { return config_.num_entities; }
  std::size_t num_relations() const { return config_.num_relations; }
  std::size_t row_size() const { return config_.row_size(); }

  // Throw std::out_of_range for an index outside [0, count).
  std::span<const double> entity(std::size_t i) const;
  std::span<double> entity(std::size_t i);
  std::span<const double> relation(std::size_t i) const;
  std::span<double> relation(std::size_t i);

  ga::Multivector entity_component(std::size_t i, std::size_t c) const;
  ga::Multivector relation_component(std::size_t i, std::size_t c) const;
  void set_entity_component(std::size_t i, std::size_t c, const ga::Multivector& m);
  void set_relation_component(std::size_t i, std::size_t c, const ga::Multivector& m);

  std::span<const double> entity_data() const { return entities_; }
  std::span<double> entity_data() { return entities_; }
  std::span<const double> relation_data() const { return relations_; }
  std::span<double> relation_data() { return relations_; }

  // Round every coefficient through float when precision is f32.
  void quantize();
  bool all_finite() const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  ModelConfig config_;
  std::vector<double> entities_;
  std::vector<double> relations_;
};

enum class Side { replace_head, replace_tail };

// sum_i Sc(M_h_i * M_r_i * conj(M_t_i)) using the fused per-grade expansion.
double score_triple(const EmbeddingTable& table, std::size_t h, std::size_t r, std::size_t t);

// Scores of every candidate entity. For replace_tail `fixed` is the head;
// for replace_head it is the tail. OpenMP-parallel over candidates.
std::vector<double> score_all(const EmbeddingTable& table, std::size_t fixed, std::size_t r,
                              Side side);
void score_all(const EmbeddingTable& table, std::size_t fixed, std::size_t r, Side side,
               std::span<double> out);

struct Projection {
  enum class Kind { complex, quaternion, protate };
  Kind kind = Kind::complex;
  double modulus = 1.0;  // C, protate only

  static Projection complex() { return {Kind::complex, 1.0}; }
  static Projection quaternion() { return {Kind::quaternion, 1.0}; }
  static Projection protate(double c = 1.0) { return {Kind::protate, c}; }
};

// complex: keep {1, e1e2}; quaternion (grade 3): keep {1, e1e2, e2e3, e1e3};
// protate (grade 2): complex, then |r_i| = 1 and |h_i| = |t_i| = C.
// Throws std::invalid_argument on an incompatible grade.
EmbeddingTable project_subsumption(const EmbeddingTable& table, const Projection& mode);

// Sum of two models' scores. Throws std::invalid_argument unless both tables
// have the same entity and relation counts.
double ensemble_score(const EmbeddingTable& a, const EmbeddingTable& b, std::size_t h,
                      std::size_t r, std::size_t t);

struct RelationReport {
  Grade grade = Grade::two;
  double scalar_norm = 0.0;
  double vector_norm = 0.0;
  double bivector_norm = 0.0;
  double trivector_norm = 0.0;
  // Set when a partner relation was given.
  std::optional<double> conjugacy_distance;
  std::optional<double> conjugacy_normalized;
};

// Blade-group norms over the k components of relation r and, with a
// partner, sum_i ||M_r_i - conj(M_r'_i)|| (and that divided by sum_i ||M_r_i||).
RelationReport inspect_relation(const EmbeddingTable& table, std::size_t r,
                                std::optional<std::size_t> partner = std::nullopt);

}  // namespace geome
