#include "geome/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "geome/kernels.hpp"

namespace geome {
namespace {

kernels::Shape shape_of(const EmbeddingTable& t) { return {t.grade(), t.config().dim_k}; }

void check_index(std::size_t i, std::size_t n, const char* what) {
  if (i >= n) {
    throw std::out_of_range(std::string(what) + " index " + std::to_string(i) +
                            " out of range [0, " + std::to_string(n) + ")");
  }
}

}  // namespace

EmbeddingTable::EmbeddingTable(const ModelConfig& config) : config_(config) {
  if (config.dim_k == 0 || config.num_entities == 0 || config.num_relations == 0) {
    throw std::invalid_argument("embedding table dimensions must be positive");
  }
  entities_.assign(config.num_entities * config.row_size(), 0.0);
  relations_.assign(config.num_relations * config.row_size(), 0.0);
}

std::span<const double> EmbeddingTable::entity(std::size_t i) const {
  check_index(i, num_entities(), "entity");
  return std::span<const double>(entities_).subspan(i * row_size(), row_size());
}

std::span<double> EmbeddingTable::entity(std::size_t i) {
  check_index(i, num_entities(), "entity");
  return std::span<double>(entities_).subspan(i * row_size(), row_size());
}

std::span<const double> EmbeddingTable::relation(std::size_t i) const {
  check_index(i, num_relations(), "relation");
  return std::span<const double>(relations_).subspan(i * row_size(), row_size());
}

std::span<double> EmbeddingTable::relation(std::size_t i) {
  check_index(i, num_relations(), "relation");
  return std::span<double>(relations_).subspan(i * row_size(), row_size());
}

ga::Multivector EmbeddingTable::entity_component(std::size_t i, std::size_t c) const {
  check_index(c, config_.dim_k, "component");
  return ga::Multivector(grade(), entity(i).subspan(c * config_.blades(), config_.blades()));
}

ga::Multivector EmbeddingTable::relation_component(std::size_t i, std::size_t c) const {
  check_index(c, config_.dim_k, "component");
  return ga::Multivector(grade(), relation(i).subspan(c * config_.blades(), config_.blades()));
}

void EmbeddingTable::set_entity_component(std::size_t i, std::size_t c, const ga::Multivector& m) {
  check_index(c, config_.dim_k, "component");
  if (m.grade() != grade()) throw std::invalid_argument("component grade mismatch");
  std::ranges::copy(m.coeffs(), entity(i).begin() + c * config_.blades());
}

void EmbeddingTable::set_relation_component(std::size_t i, std::size_t c,
                                            const ga::Multivector& m) {
  check_index(c, config_.dim_k, "component");
  if (m.grade() != grade()) throw std::invalid_argument("component grade mismatch");
  std::ranges::copy(m.coeffs(), relation(i).begin() + c * config_.blades());
}

void EmbeddingTable::quantize() {
  if (config_.precision != Precision::f32) return;
  for (double& v : entities_) v = static_cast<double>(static_cast<float>(v));
  for (double& v : relations_) v = static_cast<double>(static_cast<float>(v));
}

bool EmbeddingTable::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::ranges::all_of(entities_, finite) && std::ranges::all_of(relations_, finite);
}

double score_triple(const EmbeddingTable& table, std::size_t h, std::size_t r, std::size_t t) {
  return kernels::triple_score(shape_of(table), table.entity(h), table.relation(r),
                               table.entity(t));
}

void score_all(const EmbeddingTable& table, std::size_t fixed, std::size_t r, Side side,
               std::span<double> out) {
  if (out.size() != table.num_entities()) throw std::invalid_argument("score buffer size");
  std::vector<double> query(table.row_size());
  if (side == Side::replace_tail) {
    kernels::tail_query(shape_of(table), table.entity(fixed), table.relation(r), query);
  } else {
    kernels::head_query(shape_of(table), table.relation(r), table.entity(fixed), query);
  }
  kernels::score_rows(table.entity_data(), table.row_size(), query, out);
}

std::vector<double> score_all(const EmbeddingTable& table, std::size_t fixed, std::size_t r,
                              Side side) {
  std::vector<double> out(table.num_entities());
  score_all(table, fixed, r, side, out);
  return out;
}

EmbeddingTable project_subsumption(const EmbeddingTable& table, const Projection& mode) {
  const Grade g = table.grade();
  switch (mode.kind) {
    case Projection::Kind::complex:
      if (g == Grade::one) throw std::invalid_argument("complex projection needs grade >= 2");
      break;
    case Projection::Kind::quaternion:
      if (g != Grade::three) throw std::invalid_argument("quaternion projection needs grade 3");
      break;
    case Projection::Kind::protate:
      if (g != Grade::two) throw std::invalid_argument("pRotatE projection needs grade 2");
      if (!(mode.modulus > 0.0)) throw std::invalid_argument("pRotatE modulus must be positive");
      break;
  }

  // Surviving blade slots.
  std::array<bool, ga::kMaxBlades> keep{};
  const auto masks = ga::blade_masks(g);
  for (std::size_t b = 0; b < masks.size(); ++b) {
    const int k = std::popcount(masks[b]);
    if (mode.kind == Projection::Kind::quaternion) {
      keep[b] = k == 0 || k == 2;
    } else {
      keep[b] = b == 0 || b == ga::e12_slot(g);
    }
  }

  EmbeddingTable out = table;
  const std::size_t nb = ga::blade_count(g);
  auto project = [&](std::span<double> data) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!keep[i % nb]) data[i] = 0.0;
    }
  };
  project(out.entity_data());
  project(out.relation_data());

  if (mode.kind == Projection::Kind::protate) {
    const std::size_t im = ga::e12_slot(g);
    auto rescale = [&](std::span<double> data, double target) {
      for (std::size_t off = 0; off < data.size(); off += nb) {
        const double m = std::hypot(data[off], data[off + im]);
        if (m == 0.0) {
          data[off] = target;
        } else {
          data[off] *= target / m;
          data[off + im] *= target / m;
        }
      }
    };
    rescale(out.entity_data(), mode.modulus);
    rescale(out.relation_data(), 1.0);
  }
  return out;
}

double ensemble_score(const EmbeddingTable& a, const EmbeddingTable& b, std::size_t h,
                      std::size_t r, std::size_t t) {
  if (a.num_entities() != b.num_entities() || a.num_relations() != b.num_relations()) {
    throw std::invalid_argument("ensemble members do not share entity/relation dictionaries");
  }
  return score_triple(a, h, r, t) + score_triple(b, h, r, t);
}

RelationReport inspect_relation(const EmbeddingTable& table, std::size_t r,
                                std::optional<std::size_t> partner) {
  const Grade g = table.grade();
  const std::size_t nb = ga::blade_count(g);
  const auto row = table.relation(r);
  std::array<double, 4> sums{};
  for (std::size_t i = 0; i < row.size(); ++i) {
    sums[ga::blade_grade(g, i % nb)] += row[i] * row[i];
  }
  RelationReport rep;
  rep.grade = g;
  rep.scalar_norm = std::sqrt(sums[0]);
  rep.vector_norm = std::sqrt(sums[1]);
  rep.bivector_norm = std::sqrt(sums[2]);
  rep.trivector_norm = std::sqrt(sums[3]);

  if (partner) {
    double dist = 0.0;
    double mag = 0.0;
    for (std::size_t c = 0; c < table.config().dim_k; ++c) {
      const ga::Multivector m = table.relation_component(r, c);
      const ga::Multivector p = table.relation_component(*partner, c);
      dist += ga::norm(m - ga::conjugate(p));
      mag += ga::norm(m);
    }
    rep.conjugacy_distance = dist;
    rep.conjugacy_normalized = mag > 0.0 ? dist / mag : (dist == 0.0 ? 0.0 : INFINITY);
  }
  return rep;
}

}  // namespace geome
