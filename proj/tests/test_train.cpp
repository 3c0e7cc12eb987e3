#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "geome/error.hpp"
#include "geome/synthetic.hpp"
#include "geome/train.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace geome;
using testing_support::random_table;

namespace {

constexpr Grade kGrades[] = {Grade::one, Grade::two, Grade::three};

TrainConfig cfg_for(Grade g, std::size_t k, double lambda) {
  TrainConfig c;
  c.grade = g;
  c.dim_k = k;
  c.lambda_reg = lambda;
  return c;
}

std::vector<Triple> random_batch(std::size_t n, std::size_t ne, std::size_t nr, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int32_t> e(0, static_cast<std::int32_t>(ne) - 1);
  std::uniform_int_distribution<std::int32_t> r(0, static_cast<std::int32_t>(nr) - 1);
  std::vector<Triple> b;
  for (std::size_t i = 0; i < n; ++i) b.push_back({e(rng), r(rng), e(rng)});
  return b;
}

// Small synthetic KG for loop-level tests.
struct SmallKG {
  TripleStore train, valid;
};

SmallKG small_kg() {
  SyntheticSpec spec;
  spec.n_entities = 40;
  spec.n_sym = 1;
  spec.n_antisym = 1;
  spec.n_inverse_pairs = 1;
  spec.n_comp_triples = 1;
  spec.n_chains = 5;
  spec.density = 0.03;
  const auto kg = generate_synthetic(spec);
  return {augment_reciprocal(kg.train), kg.valid};
}

}  // namespace

TEST(Train, RegularizerOnlyExample) {
  EmbeddingTable t({Grade::two, 1, 1, 1, Precision::f64});
  t.set_entity_component(0, 0, ga::Multivector::scalar(Grade::two, 1.0));
  t.set_relation_component(0, 0, ga::Multivector::scalar(Grade::two, 1.0));
  const Triple tr{0, 0, 0};
  const auto lg = loss_and_grads(t, std::span(&tr, 1), cfg_for(Grade::two, 1, 3.0));
  EXPECT_DOUBLE_EQ(lg.loss, 3.0);
}

TEST(Train, SingleCandidateSoftmaxIsZero) {
  const auto t = random_table(Grade::three, 3, 1, 2, 4);
  const std::vector<Triple> b{{0, 0, 0}, {0, 1, 0}};
  EXPECT_NEAR(loss_and_grads(t, b, cfg_for(Grade::three, 3, 0.0)).loss, 0.0, 1e-15);
}

TEST(Train, RegularizerClosedFormWithFrozenSoftmax) {
  const auto t = random_table(Grade::two, 4, 1, 3, 5);
  const std::vector<Triple> b{{0, 2, 0}, {0, 1, 0}, {0, 2, 0}};
  const double lambda = 0.37;
  double n3 = 0.0;
  auto cube = [](std::span<const double> row) {
    double s = 0;
    for (double v : row) s += std::abs(v) * std::abs(v) * std::abs(v);
    return s;
  };
  for (const auto& tr : b) n3 += 2 * cube(t.entity(0)) + cube(t.relation(tr.relation));
  EXPECT_NEAR(loss_and_grads(t, b, cfg_for(Grade::two, 4, lambda)).loss, lambda / 3 * n3, 1e-12);
}

TEST(Train, LossMatchesLogSoftmaxOracle) {
  const auto t = random_table(Grade::two, 2, 6, 2, 6, 0.5);
  const std::vector<Triple> b{{1, 0, 4}};
  double want = 0;
  for (const bool tail_side : {true, false}) {
    std::vector<double> s;
    for (std::size_t j = 0; j < 6; ++j) s.push_back(tail_side ? score_triple(t, 1, 0, j) : score_triple(t, j, 0, 4));
    double z = 0;
    for (double v : s) z += std::exp(v);
    want += -std::log(std::exp(s[tail_side ? 4 : 1]) / z);
  }
  EXPECT_NEAR(loss_and_grads(t, b, cfg_for(Grade::two, 2, 0.0)).loss, want, 1e-12);
}

TEST(Train, GradCheckAllGrades) {
  for (const Grade g : kGrades) {
    for (const double lambda : {0.0, 0.01}) {
      GradCheckSpec spec;
      spec.grade = g;
      spec.lambda_reg = lambda;
      spec.seed = 3;
      EXPECT_LT(grad_check(spec), 1e-4) << "grade " << static_cast<int>(g) << " lambda " << lambda;
    }
  }
}

TEST(Train, GradCheckWithConstraints) {
  GradCheckSpec spec;
  spec.num_relations = 3;
  spec.batch = 8;
  spec.constraints = {{PatternConstraint::Kind::symmetric, 0, 0, 0.7},
                      {PatternConstraint::Kind::inverse, 1, 2, 1.3}};
  EXPECT_LT(grad_check(spec), 1e-4);
}

TEST(Train, ZeroEmbeddingsGiveZeroRegularizerGradient) {
  EmbeddingTable t({Grade::two, 2, 3, 1, Precision::f64});
  const std::vector<Triple> b{{0, 0, 1}};
  const auto lg = loss_and_grads(t, b, cfg_for(Grade::two, 2, 0.5));
  for (double v : lg.grads.relation) EXPECT_EQ(v, 0.0);
  for (double v : lg.grads.entity) EXPECT_EQ(v, 0.0);
}

TEST(Train, ParallelMatchesReference) {
  for (const Grade g : kGrades) {
    const auto t = random_table(g, 5, 70, 6, 9, 0.3);
    const auto b = random_batch(75, 70, 6, 10);  // spans more than one chunk
    TrainConfig c = cfg_for(g, 5, 0.01);
    c.constraints = {{PatternConstraint::Kind::inverse, 2, 3, 0.5}};
    const auto fast = loss_and_grads(t, b, c);
    const auto ref = reference::loss_and_grads(t, b, c);
    EXPECT_LE(oracle::rel_err(fast.loss, ref.loss), 1e-12);
    ASSERT_EQ(fast.grads.relation_rows, ref.grads.relation_rows);
    for (std::size_t i = 0; i < ref.grads.entity.size(); ++i) {
      EXPECT_NEAR(fast.grads.entity[i], ref.grads.entity[i], 1e-10 * (1 + std::abs(ref.grads.entity[i])));
    }
    for (std::size_t i = 0; i < ref.grads.relation.size(); ++i) {
      EXPECT_NEAR(fast.grads.relation[i], ref.grads.relation[i], 1e-10 * (1 + std::abs(ref.grads.relation[i])));
    }
  }
}

TEST(Train, RelationRowsAreTheBatchRelations) {
  const auto t = random_table(Grade::two, 2, 5, 6, 11);
  const std::vector<Triple> b{{0, 4, 1}, {2, 1, 3}, {1, 4, 0}};
  EXPECT_EQ(loss_and_grads(t, b, cfg_for(Grade::two, 2, 0.0)).grads.relation_rows,
            (std::vector<std::int32_t>{1, 4}));
}

TEST(Train, RejectsOutOfRangeRelation) {
  const auto t = random_table(Grade::two, 2, 5, 4, 12);
  const std::vector<Triple> b{{0, 4, 1}};
  EXPECT_THROW(loss_and_grads(t, b, cfg_for(Grade::two, 2, 0.0)), std::out_of_range);
  EXPECT_THROW(loss_and_grads(t, std::vector<Triple>{{0, 0, 1}}, cfg_for(Grade::two, 2, -1.0)),
               std::invalid_argument);
}

TEST(Train, DivergenceCarriesBatchIndex) {
  auto t = random_table(Grade::two, 2, 5, 1, 13);
  t.entity_data()[0] = std::numeric_limits<double>::infinity();
  const std::vector<Triple> b{{0, 0, 1}};
  try {
    loss_and_grads(t, b, cfg_for(Grade::two, 2, 0.01), 17);
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.batch_index(), 17u);
  }
}

TEST(Train, AdagradSteps) {
  EmbeddingTable t({Grade::one, 1, 1, 1, Precision::f64});
  auto st = OptimizerState::for_table(t);
  TrainConfig c = cfg_for(Grade::one, 1, 0.0);
  Gradients g;
  g.entity = {1.0, 0.0};
  g.relation_rows = {0};
  g.relation = {0.0, 2.0};
  adagrad_step(t, st, g, c);
  EXPECT_NEAR(t.entity_data()[0], -0.1, 1e-9);
  EXPECT_EQ(t.entity_data()[1], 0.0);
  EXPECT_EQ(st.entity_acc[1], 0.0);
  EXPECT_NEAR(t.relation_data()[1], -0.1, 1e-9);
  const double before = t.entity_data()[0];
  adagrad_step(t, st, g, c);
  EXPECT_DOUBLE_EQ(before - t.entity_data()[0], 0.1 / (std::sqrt(2.0) + 1e-10));
  EXPECT_EQ(st.entity_acc[0], 2.0);

  Gradients bad;
  bad.entity = {1.0};
  EXPECT_THROW(adagrad_step(t, st, bad, c), std::invalid_argument);
}

TEST(Train, AccumulatorsNeverDecrease) {
  auto t = random_table(Grade::two, 2, 8, 2, 14);
  auto st = OptimizerState::for_table(t);
  const auto c = cfg_for(Grade::two, 2, 0.01);
  for (int step = 0; step < 5; ++step) {
    const auto prev = st.entity_acc;
    adagrad_step(t, st, loss_and_grads(t, random_batch(4, 8, 2, step), c).grads, c);
    for (std::size_t i = 0; i < prev.size(); ++i) EXPECT_GE(st.entity_acc[i], prev[i]);
  }
}

TEST(Train, InitTableIsSeeded) {
  const ModelConfig mc{Grade::two, 3, 4, 2, Precision::f64};
  EXPECT_EQ(init_table(mc, 5, 0.01), init_table(mc, 5, 0.01));
  EXPECT_FALSE(init_table(mc, 5, 0.01) == init_table(mc, 6, 0.01));
  EXPECT_THROW(init_table(mc, 5, 0.0), std::invalid_argument);
}

TEST(Train, FitZeroEpochsReturnsInit) {
  const auto kg = small_kg();
  TrainConfig c = cfg_for(Grade::two, 4, 0.01);
  c.max_epochs = 0;
  const auto fr = fit(kg.train, kg.valid, c);
  const ModelConfig mc{Grade::two, 4, kg.train.num_entities(), kg.train.num_relations(), Precision::f64};
  EXPECT_EQ(fr.table, init_table(mc, c.seed, c.init_std));
  EXPECT_TRUE(fr.history.epochs.empty());
}

TEST(Train, FitRequiresReciprocalStore) {
  const auto kg = small_kg();
  TripleStore raw = kg.valid;
  EXPECT_THROW(fit(raw, kg.valid, cfg_for(Grade::two, 2, 0.0)), std::invalid_argument);
}

TEST(Train, FitIsDeterministicAndLossDecreases) {
  const auto kg = small_kg();
  TrainConfig c = cfg_for(Grade::two, 8, 0.01);
  c.max_epochs = 10;
  c.batch_size = 64;
  c.eval_every = 2;
  c.patience = 100;
  c.seed = 21;
  std::ostringstream log;
  const auto a = fit(kg.train, kg.valid, c, &log);
  const auto b = fit(kg.train, kg.valid, c);
  EXPECT_EQ(a.table, b.table);
  ASSERT_EQ(a.history.epochs.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.history.epochs[i].mean_loss, b.history.epochs[i].mean_loss);
  EXPECT_LT(a.history.epochs[9].mean_loss, a.history.epochs[0].mean_loss);
  EXPECT_EQ(a.history.evals.size(), 5u);
  EXPECT_NE(log.str().find("epoch=1 loss="), std::string::npos);
  EXPECT_NE(log.str().find("eval epoch=2 mr="), std::string::npos);
  EXPECT_TRUE(a.table.all_finite());
}

TEST(Train, EarlyStoppingKeepsBestEvaluation) {
  const auto kg = small_kg();
  TrainConfig c = cfg_for(Grade::two, 4, 0.01);
  c.max_epochs = 40;
  c.batch_size = 32;
  c.eval_every = 1;
  c.patience = 2;
  const auto fr = fit(kg.train, kg.valid, c);
  double best = -1;
  std::size_t best_epoch = 0;
  for (const auto& e : fr.history.evals) {
    if (e.metrics.mrr > best) {
      best = e.metrics.mrr;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(fr.history.best_epoch, best_epoch);
  // either ran out of epochs or stopped after `patience` non-improving evaluations
  const std::size_t last = fr.history.evals.back().epoch;
  EXPECT_TRUE(last == 40 || last - best_epoch == 2);
}

TEST(Train, Float32TrainingKeepsFloatValues) {
  const auto kg = small_kg();
  TrainConfig c = cfg_for(Grade::two, 4, 0.01);
  c.precision = Precision::f32;
  c.max_epochs = 2;
  c.batch_size = 64;
  const auto fr = fit(kg.train, kg.valid, c);
  for (double v : fr.table.entity_data()) EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
}
