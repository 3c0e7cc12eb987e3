#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "geome/data.hpp"
#include "geome/model.hpp"

namespace geome {

struct RankMetrics {
  double mr = 0.0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t count = 0;

  std::string to_json() const;
  std::string to_table() const;
};

// Known-true completions for tail queries (h, r, ?) and head queries (?, r, t).
class FilterIndex {
 public:
  FilterIndex() = default;
  void add(const Triple& t);
  void add(std::span<const Triple> triples);
  // Sorted entity ids; empty span when the pair is unknown.
  std::span<const std::int32_t> tails(std::int32_t head, std::int32_t relation) const;
  std::span<const std::int32_t> heads(std::int32_t relation, std::int32_t tail) const;

 private:
  static std::uint64_t key(std::int32_t a, std::int32_t b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> tails_;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> heads_;
};

FilterIndex build_filter(std::span<const TripleStore* const> stores);

// 1 + #(score > true) + #(score == true)/2 over candidates not in `filter`
// (the true index itself is never filtered out).
double filtered_rank(std::span<const double> scores, std::size_t true_index,
                     std::span<const std::int32_t> filter);

// Anything that can score every candidate entity for a query.
class CandidateScorer {
 public:
  virtual ~CandidateScorer() = default;
  virtual std::size_t num_entities() const = 0;
  virtual std::size_t num_relations() const = 0;
  virtual void score_all(std::size_t fixed, std::size_t relation, Side side,
                         std::span<double> out) const = 0;
};

class TableScorer final : public CandidateScorer {
 public:
  explicit TableScorer(const EmbeddingTable& table) : table_(table) {}
  std::size_t num_entities() const override { return table_.num_entities(); }
  std::size_t num_relations() const override { return table_.num_relations(); }
  void score_all(std::size_t fixed, std::size_t relation, Side side,
                 std::span<double> out) const override;

 private:
  const EmbeddingTable& table_;
};

// Sum of two tables' scores (the GeomE+ ensemble).
class EnsembleScorer final : public CandidateScorer {
 public:
  // Throws std::invalid_argument if the tables' counts differ.
  EnsembleScorer(const EmbeddingTable& a, const EmbeddingTable& b);
  std::size_t num_entities() const override { return a_.num_entities(); }
  std::size_t num_relations() const override { return a_.num_relations(); }
  void score_all(std::size_t fixed, std::size_t relation, Side side,
                 std::span<double> out) const override;

 private:
  const EmbeddingTable& a_;
  const EmbeddingTable& b_;
};

struct EvalOptions {
  // When set, head queries (?, r, t) are answered as tail queries
  // (t, r + offset, ?) on the reciprocal relation.
  std::optional<std::size_t> reciprocal_offset;
  bool filtered = true;
};

// Per-event ranks in order [tail(0), head(0), tail(1), head(1), ...].
std::vector<double> rank_events(const CandidateScorer& scorer, std::span<const Triple> test,
                                const FilterIndex& filter, const EvalOptions& opts = {});

RankMetrics aggregate(std::span<const double> ranks);

RankMetrics evaluate_split(const CandidateScorer& scorer, std::span<const Triple> test,
                           const FilterIndex& filter, const EvalOptions& opts = {});

}  // namespace geome
