#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <cmath>
#include <functional>
#include <random>

#include "geome/eval.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace geome;

namespace {

// Scores from a fixed rule over (fixed, relation, side, candidate).
class FnScorer final : public CandidateScorer {
 public:
  using Fn = std::function<double(std::size_t, std::size_t, Side, std::size_t)>;
  FnScorer(std::size_t n, std::size_t r, Fn f) : n_(n), r_(r), f_(std::move(f)) {}
  std::size_t num_entities() const override { return n_; }
  std::size_t num_relations() const override { return r_; }
  void score_all(std::size_t fixed, std::size_t relation, Side side,
                 std::span<double> out) const override {
    for (std::size_t j = 0; j < n_; ++j) out[j] = f_(fixed, relation, side, j);
  }

 private:
  std::size_t n_, r_;
  Fn f_;
};

std::vector<Triple> chain_triples(std::size_t n) {
  std::vector<Triple> v;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    v.push_back({static_cast<std::int32_t>(i), 0, static_cast<std::int32_t>(i + 1)});
  }
  return v;
}

}  // namespace

TEST(Eval, FilteredRankExamples) {
  const std::vector<std::int32_t> none;
  EXPECT_EQ(filtered_rank(std::vector<double>{0.9, 0.5, 0.2}, 0, none), 1.0);
  EXPECT_EQ(filtered_rank(std::vector<double>{0.5, 0.9, 0.2}, 0, std::vector<std::int32_t>{1}), 1.0);
  EXPECT_EQ(filtered_rank(std::vector<double>{0.5, 0.5, 0.2}, 0, none), 1.5);
  EXPECT_EQ(filtered_rank(std::vector<double>{0.5, 0.9, 0.2}, 0, none), 2.0);
  // the true index is never filtered away
  EXPECT_EQ(filtered_rank(std::vector<double>{0.1, 0.9, 0.2}, 0, std::vector<std::int32_t>{0, 1}), 2.0);
  EXPECT_THROW(filtered_rank(std::vector<double>{0.1}, 1, none), std::out_of_range);
}

TEST(Eval, FilteringIsMonotoneAndBounded) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(30);
    for (auto& x : s) x = std::round(d(rng) * 3) / 3;  // ties on purpose
    std::vector<std::int32_t> filter;
    double prev = filtered_rank(s, 4, filter);
    for (std::int32_t j = 0; j < 30; j += 3) {
      filter.push_back(j);
      const double r = filtered_rank(s, 4, filter);
      EXPECT_LE(r, prev);
      const auto removed = static_cast<double>(filter.size() - (j >= 4 ? 1 : 0));
      EXPECT_GE(r, 1.0);
      EXPECT_LE(r, 30.0 - removed);
      prev = r;
    }
  }
}

TEST(Eval, RankInvariantUnderIncreasingTransform) {
  const std::vector<double> s{0.3, -1.2, 2.0, 0.3, 0.7};
  std::vector<double> t;
  for (double v : s) t.push_back(std::exp(3 * v) + 5);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(filtered_rank(s, i, {}), filtered_rank(t, i, {}));
}

TEST(Eval, OracleScorerIsPerfect) {
  const auto test = chain_triples(20);
  // true completion of a chain triple is the neighbour
  FnScorer perfect(20, 1, [](std::size_t fixed, std::size_t, Side side, std::size_t j) {
    const std::size_t want = side == Side::replace_tail ? fixed + 1 : fixed - 1;
    return j == want ? 1.0 : 0.0;
  });
  const auto m = evaluate_split(perfect, test, FilterIndex{});
  EXPECT_EQ(m.mr, 1.0);
  EXPECT_EQ(m.mrr, 1.0);
  EXPECT_EQ(m.hits1, 1.0);
  EXPECT_EQ(m.hits3, 1.0);
  EXPECT_EQ(m.hits10, 1.0);
  EXPECT_EQ(m.count, 2 * test.size());
}

TEST(Eval, AntiOracleScorer) {
  const std::size_t n = 25;
  const auto test = chain_triples(n);
  FnScorer anti(n, 1, [](std::size_t fixed, std::size_t, Side side, std::size_t j) {
    const std::size_t want = side == Side::replace_tail ? fixed + 1 : fixed - 1;
    return j == want ? -1.0 : static_cast<double>(j);
  });
  EvalOptions raw;
  raw.filtered = false;
  const auto m = evaluate_split(anti, test, FilterIndex{}, raw);
  EXPECT_EQ(m.mr, static_cast<double>(n));
  EXPECT_DOUBLE_EQ(m.mrr, 1.0 / static_cast<double>(n));
}

TEST(Eval, RandomScorerMatchesExpectation) {
  const std::size_t n = 100;
  std::vector<Triple> test;
  for (std::int32_t i = 0; i < 500; ++i) test.push_back({i % 100, 0, (i * 7 + 1) % 100});
  FnScorer random(n, 1, [](std::size_t fixed, std::size_t rel, Side side, std::size_t j) {
    std::seed_seq seq{fixed, rel, static_cast<std::size_t>(side), j};
    std::mt19937_64 rng(seq);
    return std::uniform_real_distribution<double>()(rng);
  });
  const auto m = evaluate_split(random, test, FilterIndex{});
  EXPECT_EQ(m.count, 1000u);
  EXPECT_NEAR(m.mrr, oracle::random_mrr(n), 0.01);
  EXPECT_NEAR(oracle::random_mrr(100), 0.0519, 1e-4);
}

TEST(Eval, MetricOrderingInvariants) {
  const std::vector<double> ranks{1, 2.5, 4, 11, 1, 3};
  const auto m = aggregate(ranks);
  EXPECT_LE(m.hits1, m.hits3);
  EXPECT_LE(m.hits3, m.hits10);
  EXPECT_GE(m.mr, 1.0);
  EXPECT_LE(m.mrr, 1.0);
  EXPECT_DOUBLE_EQ(m.mr, 22.5 / 6);
  EXPECT_DOUBLE_EQ(m.hits3, 4.0 / 6);
  EXPECT_EQ(aggregate(std::vector<double>{}).count, 0u);
}

TEST(Eval, JsonAndTable) {
  const auto m = aggregate(std::vector<double>{1, 2});
  const auto j = nlohmann::json::parse(m.to_json());
  EXPECT_EQ(j.size(), 6u);
  EXPECT_DOUBLE_EQ(j["mrr"].get<double>(), 0.75);
  EXPECT_EQ(j["count"].get<int>(), 2);
  EXPECT_NE(m.to_table().find("Hits@10"), std::string::npos);
  EXPECT_EQ(m.to_json().rfind("{\"mr\":", 0), 0u);
}

TEST(Eval, FilterIndexAndBuildFilter) {
  TripleStore s;
  s.entities = std::make_shared<const Dictionary>(std::vector<std::string>{"a", "b", "c"});
  s.relations = std::make_shared<const Dictionary>(std::vector<std::string>{"r"});
  s.triples = {{0, 0, 1}, {0, 0, 2}, {2, 0, 1}};
  const auto aug = augment_reciprocal(s);
  const TripleStore* stores[] = {&aug};
  const auto f = build_filter(stores);
  EXPECT_EQ(std::vector<std::int32_t>(f.tails(0, 0).begin(), f.tails(0, 0).end()),
            (std::vector<std::int32_t>{1, 2}));
  EXPECT_EQ(std::vector<std::int32_t>(f.heads(0, 1).begin(), f.heads(0, 1).end()),
            (std::vector<std::int32_t>{0, 2}));
  EXPECT_TRUE(f.tails(1, 1).empty());  // reciprocal halves are not indexed
}

TEST(Eval, ReciprocalHeadQueriesAgree) {
  const std::size_t n = 30, R = 2;
  auto table = testing_support::random_table(Grade::two, 4, n, 2 * R, 77);
  std::vector<Triple> test;
  for (std::int32_t i = 0; i < 20; ++i) test.push_back({i, i % 2, (i * 3 + 5) % 30});
  FilterIndex filter;
  filter.add(test);
  EvalOptions recip;
  recip.reciprocal_offset = R;
  const TableScorer scorer(table);
  const auto ranks = rank_events(scorer, test, filter, recip);

  // head query on (h, r, t) is the tail query on (t, r + R, h)
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& t = test[i];
    score_all(table, t.tail, t.relation + R, Side::replace_tail, scores);
    EXPECT_EQ(ranks[2 * i + 1], filtered_rank(scores, t.head, filter.heads(t.relation, t.tail)));
  }

  // with r^-1 = conj(r) both modes rank identically
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < 4; ++c) table.set_relation_component(r + R, c, ga::conjugate(table.relation_component(r, c)));
  }
  const auto a = rank_events(scorer, test, filter, recip);
  const auto b = rank_events(scorer, test, filter, EvalOptions{});
  EXPECT_EQ(a, b);
}

TEST(Eval, EnsembleScorerSumsAndChecksShape) {
  const auto a = testing_support::random_table(Grade::two, 2, 5, 1, 1);
  const auto b = testing_support::random_table(Grade::three, 2, 5, 1, 2);
  const EnsembleScorer e(a, b);
  std::vector<double> out(5);
  e.score_all(1, 0, Side::replace_tail, out);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(out[j], ensemble_score(a, b, 1, 0, j), 1e-12);
  EXPECT_THROW(EnsembleScorer(a, testing_support::random_table(Grade::two, 2, 6, 1, 3)), std::invalid_argument);
}

TEST(Eval, RejectsTriplesOutsideModel) {
  const auto a = testing_support::random_table(Grade::two, 2, 5, 2, 1);
  const std::vector<Triple> bad{{0, 0, 5}};
  EXPECT_THROW(evaluate_split(TableScorer(a), bad, FilterIndex{}), std::invalid_argument);
  EvalOptions recip;
  recip.reciprocal_offset = 2;
  EXPECT_THROW(evaluate_split(TableScorer(a), std::vector<Triple>{{0, 0, 1}}, FilterIndex{}, recip),
               std::invalid_argument);
}
