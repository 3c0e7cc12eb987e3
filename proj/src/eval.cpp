#include "geome/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace geome {

std::string RankMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["mr"] = mr;
  j["mrr"] = mrr;
  j["hits1"] = hits1;
  j["hits3"] = hits3;
  j["hits10"] = hits10;
  j["count"] = count;
  return j.dump();
}

std::string RankMetrics::to_table() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%-8s %12s\n%-8s %12.4f\n%-8s %12.6f\n%-8s %12.6f\n%-8s %12.6f\n%-8s %12.6f\n"
                "%-8s %12zu\n",
                "metric", "value", "MR", mr, "MRR", mrr, "Hits@1", hits1, "Hits@3", hits3,
                "Hits@10", hits10, "count", count);
  return buf;
}

void FilterIndex::add(const Triple& t) {
  auto insert_sorted = [](std::vector<std::int32_t>& v, std::int32_t x) {
    const auto it = std::ranges::lower_bound(v, x);
    if (it == v.end() || *it != x) v.insert(it, x);
  };
  insert_sorted(tails_[key(t.head, t.relation)], t.tail);
  insert_sorted(heads_[key(t.relation, t.tail)], t.head);
}

void FilterIndex::add(std::span<const Triple> triples) {
  for (const auto& t : triples) add(t);
}

std::span<const std::int32_t> FilterIndex::tails(std::int32_t head, std::int32_t relation) const {
  const auto it = tails_.find(key(head, relation));
  if (it == tails_.end()) return {};
  return it->second;
}

std::span<const std::int32_t> FilterIndex::heads(std::int32_t relation, std::int32_t tail) const {
  const auto it = heads_.find(key(relation, tail));
  if (it == heads_.end()) return {};
  return it->second;
}

FilterIndex build_filter(std::span<const TripleStore* const> stores) {
  FilterIndex f;
  for (const TripleStore* s : stores) {
    for (const auto& t : s->triples) {
      // reciprocal halves carry no extra facts
      if (static_cast<std::size_t>(t.relation) < s->num_raw_relations()) f.add(t);
    }
  }
  return f;
}

double filtered_rank(std::span<const double> scores, std::size_t true_index,
                     std::span<const std::int32_t> filter) {
  if (true_index >= scores.size()) throw std::out_of_range("true index out of range");
  const double target = scores[true_index];
  std::size_t greater = 0;
  std::size_t equal = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j == true_index) continue;
    if (scores[j] > target) {
      ++greater;
    } else if (scores[j] == target) {
      ++equal;
    }
  }
  // Remove the filtered competitors that were counted.
  for (const std::int32_t f : filter) {
    const auto j = static_cast<std::size_t>(f);
    if (j == true_index || j >= scores.size()) continue;
    if (scores[j] > target) {
      --greater;
    } else if (scores[j] == target) {
      --equal;
    }
  }
  return 1.0 + static_cast<double>(greater) + static_cast<double>(equal) / 2.0;
}

void TableScorer::score_all(std::size_t fixed, std::size_t relation, Side side,
                            std::span<double> out) const {
  geome::score_all(table_, fixed, relation, side, out);
}

EnsembleScorer::EnsembleScorer(const EmbeddingTable& a, const EmbeddingTable& b) : a_(a), b_(b) {
  if (a.num_entities() != b.num_entities() || a.num_relations() != b.num_relations()) {
    throw std::invalid_argument("ensemble members do not share entity/relation dictionaries");
  }
}

void EnsembleScorer::score_all(std::size_t fixed, std::size_t relation, Side side,
                               std::span<double> out) const {
  std::vector<double> tmp(out.size());
  geome::score_all(a_, fixed, relation, side, out);
  geome::score_all(b_, fixed, relation, side, tmp);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += tmp[j];
}

std::vector<double> rank_events(const CandidateScorer& scorer, std::span<const Triple> test,
                                const FilterIndex& filter, const EvalOptions& opts) {
  const std::size_t n = scorer.num_entities();
  if (opts.reciprocal_offset) {
    for (const auto& t : test) {
      if (static_cast<std::size_t>(t.relation) + *opts.reciprocal_offset >= scorer.num_relations()) {
        throw std::invalid_argument("reciprocal relation id outside the model");
      }
    }
  }
  for (const auto& t : test) {
    if (static_cast<std::size_t>(t.head) >= n || static_cast<std::size_t>(t.tail) >= n ||
        static_cast<std::size_t>(t.relation) >= scorer.num_relations()) {
      throw std::invalid_argument("test triple outside the model's dictionaries");
    }
  }

  std::vector<double> ranks(test.size() * 2);
  const auto m = static_cast<std::ptrdiff_t>(test.size());
#pragma omp parallel
  {
    std::vector<double> scores(n);
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      const Triple& t = test[i];
      scorer.score_all(t.head, t.relation, Side::replace_tail, scores);
      ranks[2 * i] = filtered_rank(scores, t.tail,
                                   opts.filtered ? filter.tails(t.head, t.relation)
                                                 : std::span<const std::int32_t>{});
      if (opts.reciprocal_offset) {
        scorer.score_all(t.tail, t.relation + *opts.reciprocal_offset, Side::replace_tail, scores);
      } else {
        scorer.score_all(t.tail, t.relation, Side::replace_head, scores);
      }
      ranks[2 * i + 1] = filtered_rank(scores, t.head,
                                       opts.filtered ? filter.heads(t.relation, t.tail)
                                                     : std::span<const std::int32_t>{});
    }
  }
  return ranks;
}

RankMetrics aggregate(std::span<const double> ranks) {
  RankMetrics m;
  m.count = ranks.size();
  if (ranks.empty()) return m;
  for (const double r : ranks) {
    m.mr += r;
    m.mrr += 1.0 / r;
    m.hits1 += r <= 1.0 ? 1.0 : 0.0;
    m.hits3 += r <= 3.0 ? 1.0 : 0.0;
    m.hits10 += r <= 10.0 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(ranks.size());
  m.mr /= n;
  m.mrr /= n;
  m.hits1 /= n;
  m.hits3 /= n;
  m.hits10 /= n;
  return m;
}

RankMetrics evaluate_split(const CandidateScorer& scorer, std::span<const Triple> test,
                           const FilterIndex& filter, const EvalOptions& opts) {
  return aggregate(rank_events(scorer, test, filter, opts));
}

}  // namespace geome
