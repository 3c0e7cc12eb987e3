#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geome/data.hpp"

namespace geome {

// Relation counts are per pattern; n_inverse_pairs yields 2 relations each and
// n_comp_triples yields (r1, r2, r3 = r1 then r2). Ground triples per plain
// relation: round(density * n^2). Each composition triple gets n_chains
// entity-disjoint chains x -r1-> y -r2-> z, implying (x, r3, z).
struct SyntheticSpec {
  std::size_t n_entities = 200;
  std::size_t n_sym = 2;
  std::size_t n_antisym = 2;
  std::size_t n_inverse_pairs = 2;
  std::size_t n_comp_triples = 1;
  double density = 0.01;
  std::size_t n_chains = 30;
  double holdout_fraction = 0.3;
  std::uint64_t seed = 0;
};

enum class Pattern { symmetric, antisymmetric, inverse, composition };

const char* pattern_name(Pattern p);

struct RelationPattern {
  std::string relation;
  Pattern pattern = Pattern::symmetric;
  std::vector<std::string> partners;
};

struct ImpliedTriple {
  Triple triple;
  Pattern pattern = Pattern::symmetric;
  std::vector<Triple> premises;  // all in train
};

struct SyntheticKG {
  TripleStore train;
  TripleStore valid;  // held-out implied triples only
  TripleStore test;   // held-out implied triples only
  std::vector<RelationPattern> relations;
  std::vector<ImpliedTriple> implied_valid;
  std::vector<ImpliedTriple> implied_test;

  std::string manifest_json() const;
};

// Throws GenerationError for an infeasible spec.
SyntheticKG generate_synthetic(const SyntheticSpec& spec);

// train.tsv, valid.tsv, test.tsv and manifest.json under `dir`.
void write_synthetic(const SyntheticKG& kg, const std::filesystem::path& dir);

}  // namespace geome
