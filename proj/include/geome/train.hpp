#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "geome/data.hpp"
#include "geome/eval.hpp"
#include "geome/model.hpp"

namespace geome {

// Squared score-difference penalty weight * (phi(h,r,t) - phi(t,r',h))^2
// added for every batch triple whose relation is `relation`. For
// `symmetric` the partner is the relation itself.
struct PatternConstraint {
  enum class Kind { symmetric, inverse };
  Kind kind = Kind::symmetric;
  std::int32_t relation = 0;
  std::int32_t partner = 0;
  double weight = 1.0;
};

struct TrainConfig {
  Grade grade = Grade::two;
  Precision precision = Precision::f64;
  std::size_t dim_k = 1000;
  double lr = 0.1;
  std::size_t batch_size = 1000;
  double lambda_reg = 0.01;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 0;
  double init_std = 1e-2;
  std::size_t eval_every = 5;
  std::size_t patience = 3;
  double adagrad_eps = 1e-10;
  std::vector<PatternConstraint> constraints;
};

struct OptimizerState {
  std::vector<double> entity_acc;
  std::vector<double> relation_acc;

  static OptimizerState for_table(const EmbeddingTable& table);
};

// Gradient of one batch. Every entity row is touched through the softmax
// denominators, so entity gradients are dense; relation gradients are kept
// for the (sorted, unique) relations of the batch only.
struct Gradients {
  std::vector<double> entity;
  std::vector<std::int32_t> relation_rows;
  std::vector<double> relation;  // relation_rows.size() x row_size
};

struct LossAndGrads {
  double loss = 0.0;
  Gradients grads;
};

// Multiclass log-softmax over all heads and all tails plus per-occurrence
// N3, summed over the batch. Throws TrainingDiverged(batch_index) on a
// non-finite loss.
LossAndGrads loss_and_grads(const EmbeddingTable& table, std::span<const Triple> batch,
                            const TrainConfig& cfg, std::size_t batch_index = 0);

void adagrad_step(EmbeddingTable& table, OptimizerState& state, const Gradients& grads,
                  const TrainConfig& cfg);

// i.i.d. N(0, init_std^2), seeded.
EmbeddingTable init_table(const ModelConfig& config, std::uint64_t seed, double init_std);

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double seconds = 0.0;
};

struct EvalRecord {
  std::size_t epoch = 0;
  RankMetrics metrics;
};

struct History {
  std::vector<EpochRecord> epochs;
  std::vector<EvalRecord> evals;
  std::size_t best_epoch = 0;
};

struct FitResult {
  EmbeddingTable table;
  History history;
};

// `train` must be reciprocal-augmented; `valid` shares its dictionaries and
// holds raw relation ids. With an empty `valid` no early stopping happens and
// the final parameters are returned. Progress lines go to `log` if non-null.
FitResult fit(const TripleStore& train, const TripleStore& valid, const TrainConfig& cfg,
              std::ostream* log = nullptr);

struct GradCheckSpec {
  Grade grade = Grade::two;
  std::size_t num_entities = 5;
  std::size_t num_relations = 2;
  std::size_t dim_k = 3;
  std::size_t batch = 4;
  double lambda_reg = 0.01;
  double step = 1e-6;
  double init_std = 0.5;
  std::uint64_t seed = 0;
  std::vector<PatternConstraint> constraints;
};

// Max relative error |a - n| / max(|a|, |n|, 1e-6) between analytic and
// central-difference gradients over every coefficient of a random model.
double grad_check(const GradCheckSpec& spec);

}  // namespace geome

namespace geome::reference {

// Straightforward per-triple serial version of geome::loss_and_grads.
LossAndGrads loss_and_grads(const EmbeddingTable& table, std::span<const Triple> batch,
                            const TrainConfig& cfg);

}  // namespace geome::reference
