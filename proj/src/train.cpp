#include "geome/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "geome/error.hpp"
#include "geome/kernels.hpp"

namespace geome {
namespace {

// Triples scored together per block; bounds the C x n score buffers.
constexpr std::size_t kChunk = 32;

kernels::Shape shape_of(const EmbeddingTable& t) { return {t.grade(), t.config().dim_k}; }

void validate(const EmbeddingTable& table, std::span<const Triple> batch, const TrainConfig& cfg) {
  if (!(cfg.lambda_reg >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  for (const auto& t : batch) {
    if (t.head < 0 || t.tail < 0 || static_cast<std::size_t>(t.head) >= table.num_entities() ||
        static_cast<std::size_t>(t.tail) >= table.num_entities()) {
      throw std::out_of_range("batch entity id out of range");
    }
    if (t.relation < 0 || static_cast<std::size_t>(t.relation) >= table.num_relations()) {
      throw std::out_of_range("batch relation id " + std::to_string(t.relation) +
                              " outside [0, " + std::to_string(table.num_relations()) + ")");
    }
  }
  for (const auto& c : cfg.constraints) {
    if (c.relation < 0 || c.partner < 0 ||
        static_cast<std::size_t>(c.relation) >= table.num_relations() ||
        static_cast<std::size_t>(c.partner) >= table.num_relations()) {
      throw std::out_of_range("constraint relation id out of range");
    }
  }
}

// Sorted unique relation rows touched by the batch (including constraint partners).
std::vector<std::int32_t> touched_relations(std::span<const Triple> batch, const TrainConfig& cfg) {
  std::vector<std::int32_t> rows;
  rows.reserve(batch.size());
  for (const auto& t : batch) {
    rows.push_back(t.relation);
    for (const auto& c : cfg.constraints) {
      if (c.relation == t.relation) rows.push_back(c.partner);
    }
  }
  std::ranges::sort(rows);
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

std::span<double> relation_grad(Gradients& g, std::int32_t r, std::size_t row_size) {
  const auto it = std::ranges::lower_bound(g.relation_rows, r);
  const auto slot = static_cast<std::size_t>(it - g.relation_rows.begin());
  return std::span<double>(g.relation).subspan(slot * row_size, row_size);
}

std::span<double> entity_grad(Gradients& g, std::int32_t e, std::size_t row_size) {
  return std::span<double>(g.entity).subspan(static_cast<std::size_t>(e) * row_size, row_size);
}

// (lambda/3) sum |c|^3 over a row; gradient lambda * c * |c| (0 at c = 0).
double n3(std::span<const double> row, double lambda, std::span<double> grad) {
  double s = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double c = row[i];
    const double a = std::abs(c);
    s += a * a * a;
    grad[i] += lambda * c * a;
  }
  return lambda / 3.0 * s;
}

// N3 and pattern-constraint terms, shared by the fast and the reference path.
double add_penalties(const EmbeddingTable& table, std::span<const Triple> batch,
                     const TrainConfig& cfg, Gradients& g) {
  const auto s = shape_of(table);
  const std::size_t d = table.row_size();
  double loss = 0.0;
  for (const auto& t : batch) {
    if (cfg.lambda_reg > 0.0) {
      loss += n3(table.entity(t.head), cfg.lambda_reg, entity_grad(g, t.head, d));
      loss += n3(table.relation(t.relation), cfg.lambda_reg, relation_grad(g, t.relation, d));
      loss += n3(table.entity(t.tail), cfg.lambda_reg, entity_grad(g, t.tail, d));
    }
    for (const auto& c : cfg.constraints) {
      if (c.relation != t.relation || c.weight == 0.0) continue;
      const auto h = table.entity(t.head);
      const auto tl = table.entity(t.tail);
      const auto r = table.relation(c.relation);
      const auto p = table.relation(c.partner);
      const double diff = kernels::triple_score(s, h, r, tl) - kernels::triple_score(s, tl, p, h);
      loss += c.weight * diff * diff;
      const double w = 2.0 * c.weight * diff;
      kernels::triple_score_grad(s, h, r, tl, w, entity_grad(g, t.head, d),
                                 relation_grad(g, c.relation, d), entity_grad(g, t.tail, d));
      kernels::triple_score_grad(s, tl, p, h, -w, entity_grad(g, t.tail, d),
                                 relation_grad(g, c.partner, d), entity_grad(g, t.head, d));
    }
  }
  return loss;
}

// In place: scores -> softmax - onehot(true_index); returns logsumexp - score[true].
double softmax_residual(std::span<double> scores, std::size_t true_index) {
  const double mx = *std::ranges::max_element(scores);
  double sum = 0.0;
  for (double& v : scores) {
    v = std::exp(v - mx);
    sum += v;
  }
  const double true_exp = scores[true_index];
  for (double& v : scores) v /= sum;
  scores[true_index] -= 1.0;
  return std::log(sum) - std::log(true_exp);
}

Gradients empty_grads(const EmbeddingTable& table, std::span<const Triple> batch,
                      const TrainConfig& cfg) {
  Gradients g;
  g.entity.assign(table.num_entities() * table.row_size(), 0.0);
  g.relation_rows = touched_relations(batch, cfg);
  g.relation.assign(g.relation_rows.size() * table.row_size(), 0.0);
  return g;
}

}  // namespace

OptimizerState OptimizerState::for_table(const EmbeddingTable& table) {
  return {std::vector<double>(table.entity_data().size(), 0.0),
          std::vector<double>(table.relation_data().size(), 0.0)};
}

LossAndGrads loss_and_grads(const EmbeddingTable& table, std::span<const Triple> batch,
                            const TrainConfig& cfg, std::size_t batch_index) {
  validate(table, batch, cfg);
  const auto s = shape_of(table);
  const std::size_t d = table.row_size();
  const std::size_t n = table.num_entities();

  LossAndGrads out;
  out.grads = empty_grads(table, batch, cfg);
  Gradients& g = out.grads;

  std::vector<double> tail_q(kChunk * d), head_q(kChunk * d);
  std::vector<double> tail_s(kChunk * n), head_s(kChunk * n);
  std::vector<double> tail_g(kChunk * d), head_g(kChunk * d);

  double loss = 0.0;
  for (std::size_t start = 0; start < batch.size(); start += kChunk) {
    const std::size_t m = std::min(kChunk, batch.size() - start);
    const auto chunk = batch.subspan(start, m);
    for (std::size_t c = 0; c < m; ++c) {
      const Triple& t = chunk[c];
      kernels::tail_query(s, table.entity(t.head), table.relation(t.relation),
                          std::span<double>(tail_q).subspan(c * d, d));
      kernels::head_query(s, table.relation(t.relation), table.entity(t.tail),
                          std::span<double>(head_q).subspan(c * d, d));
    }
    const std::span<const double> tq(tail_q.data(), m * d), hq(head_q.data(), m * d);
    const std::span<double> ts(tail_s.data(), m * n), hs(head_s.data(), m * n);
    kernels::block_scores(table.entity_data(), d, tq, ts);
    kernels::block_scores(table.entity_data(), d, hq, hs);

    for (std::size_t c = 0; c < m; ++c) {
      loss += softmax_residual(ts.subspan(c * n, n), static_cast<std::size_t>(chunk[c].tail));
      loss += softmax_residual(hs.subspan(c * n, n), static_cast<std::size_t>(chunk[c].head));
    }

    // Candidate side: d/dE_j of <E_j, q_c> weighted by the residuals.
    kernels::block_row_grads(d, tq, ts, g.entity);
    kernels::block_row_grads(d, hq, hs, g.entity);

    // Query side, then back through the geometric products.
    const std::span<double> tg(tail_g.data(), m * d), hg(head_g.data(), m * d);
    kernels::block_query_grads(table.entity_data(), d, ts, tg);
    kernels::block_query_grads(table.entity_data(), d, hs, hg);
    for (std::size_t c = 0; c < m; ++c) {
      const Triple& t = chunk[c];
      kernels::tail_query_backward(s, table.entity(t.head), table.relation(t.relation),
                                   tg.subspan(c * d, d), entity_grad(g, t.head, d),
                                   relation_grad(g, t.relation, d));
      kernels::head_query_backward(s, table.relation(t.relation), table.entity(t.tail),
                                   hg.subspan(c * d, d), relation_grad(g, t.relation, d),
                                   entity_grad(g, t.tail, d));
    }
  }

  loss += add_penalties(table, batch, cfg, g);
  if (!std::isfinite(loss)) throw TrainingDiverged(batch_index);
  out.loss = loss;
  return out;
}

void adagrad_step(EmbeddingTable& table, OptimizerState& state, const Gradients& grads,
                  const TrainConfig& cfg) {
  const std::size_t d = table.row_size();
  auto theta = table.entity_data();
  if (grads.entity.size() != theta.size() || state.entity_acc.size() != theta.size() ||
      state.relation_acc.size() != table.relation_data().size() ||
      grads.relation.size() != grads.relation_rows.size() * d) {
    throw std::invalid_argument("adagrad: gradient/state shape does not match the table");
  }
  const double lr = cfg.lr;
  const double eps = cfg.adagrad_eps;
  const auto n = static_cast<std::ptrdiff_t>(theta.size());
  double* th = theta.data();
  double* acc = state.entity_acc.data();
  const double* gr = grads.entity.data();
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double gi = gr[i];
    acc[i] += gi * gi;
    th[i] -= lr * gi / (std::sqrt(acc[i]) + eps);
  }
  for (std::size_t k = 0; k < grads.relation_rows.size(); ++k) {
    const auto r = static_cast<std::size_t>(grads.relation_rows[k]);
    auto row = table.relation(r);
    double* racc = state.relation_acc.data() + r * d;
    const double* rg = grads.relation.data() + k * d;
    for (std::size_t i = 0; i < d; ++i) {
      racc[i] += rg[i] * rg[i];
      row[i] -= lr * rg[i] / (std::sqrt(racc[i]) + eps);
    }
  }
  table.quantize();
}

EmbeddingTable init_table(const ModelConfig& config, std::uint64_t seed, double init_std) {
  if (!(init_std > 0.0)) throw std::invalid_argument("init_std must be positive");
  EmbeddingTable table(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_std);
  for (double& v : table.entity_data()) v = normal(rng);
  for (double& v : table.relation_data()) v = normal(rng);
  table.quantize();
  return table;
}

FitResult fit(const TripleStore& train, const TripleStore& valid, const TrainConfig& cfg,
              std::ostream* log) {
  if (!train.reciprocal) throw std::invalid_argument("fit: training store must be reciprocal-augmented");
  if (cfg.batch_size == 0 || cfg.dim_k == 0 || cfg.eval_every == 0 || cfg.patience == 0 ||
      !(cfg.lr > 0.0) || !(cfg.adagrad_eps > 0.0)) {
    throw std::invalid_argument("fit: invalid training configuration");
  }
  if (valid.num_entities() != 0 &&
      (valid.entities != train.entities && *valid.entities != *train.entities)) {
    throw std::invalid_argument("fit: validation split uses different dictionaries");
  }

  const ModelConfig mc{cfg.grade, cfg.dim_k, train.num_entities(), train.num_relations(),
                       cfg.precision};
  EmbeddingTable table = init_table(mc, cfg.seed, cfg.init_std);
  FitResult result{table, {}};
  if (cfg.max_epochs == 0) return result;

  OptimizerState state = OptimizerState::for_table(table);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const TripleStore* filter_sources[] = {&train, &valid};
  const FilterIndex filter = build_filter(filter_sources);
  EvalOptions eval_opts;
  eval_opts.reciprocal_offset = train.num_raw_relations();

  double best_mrr = -1.0;
  std::size_t bad_evals = 0;
  std::vector<Triple> batch;
  std::size_t batch_index = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train.triples[order[i]]);
      const LossAndGrads lg = loss_and_grads(table, batch, cfg, batch_index++);
      adagrad_step(table, state, lg.grads, cfg);
      total += lg.loss;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double mean = order.empty() ? 0.0 : total / static_cast<double>(order.size());
    result.history.epochs.push_back({epoch, mean, secs});
    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "epoch=%zu loss=%.6f time=%.3f\n", epoch, mean, secs);
      *log << buf << std::flush;
    }

    if (valid.triples.empty()) continue;
    if (epoch % cfg.eval_every != 0 && epoch != cfg.max_epochs) continue;
    const RankMetrics m = evaluate_split(TableScorer(table), valid.triples, filter, eval_opts);
    result.history.evals.push_back({epoch, m});
    if (log) {
      char buf[200];
      std::snprintf(buf, sizeof(buf),
                    "eval epoch=%zu mr=%.4f mrr=%.6f hits1=%.6f hits3=%.6f hits10=%.6f\n", epoch,
                    m.mr, m.mrr, m.hits1, m.hits3, m.hits10);
      *log << buf << std::flush;
    }
    if (m.mrr > best_mrr) {
      best_mrr = m.mrr;
      result.table = table;
      result.history.best_epoch = epoch;
      bad_evals = 0;
    } else if (++bad_evals >= cfg.patience) {
      break;
    }
  }
  if (valid.triples.empty()) {
    result.table = table;
    result.history.best_epoch = result.history.epochs.size();
  }
  return result;
}

double grad_check(const GradCheckSpec& spec) {
  const ModelConfig mc{spec.grade, spec.dim_k, spec.num_entities, spec.num_relations,
                       Precision::f64};
  EmbeddingTable table = init_table(mc, spec.seed, spec.init_std);
  std::mt19937_64 rng(spec.seed + 1);
  std::uniform_int_distribution<std::int32_t> ent(0, static_cast<std::int32_t>(spec.num_entities) - 1);
  std::uniform_int_distribution<std::int32_t> rel(0, static_cast<std::int32_t>(spec.num_relations) - 1);
  std::vector<Triple> batch;
  for (std::size_t i = 0; i < spec.batch; ++i) batch.push_back({ent(rng), rel(rng), ent(rng)});

  TrainConfig cfg;
  cfg.grade = spec.grade;
  cfg.dim_k = spec.dim_k;
  cfg.lambda_reg = spec.lambda_reg;
  cfg.constraints = spec.constraints;

  const LossAndGrads analytic = loss_and_grads(table, batch, cfg);
  const std::size_t d = table.row_size();
  std::vector<double> rel_dense(table.relation_data().size(), 0.0);
  for (std::size_t k = 0; k < analytic.grads.relation_rows.size(); ++k) {
    std::copy_n(analytic.grads.relation.begin() + static_cast<std::ptrdiff_t>(k * d), d,
                rel_dense.begin() + static_cast<std::ptrdiff_t>(analytic.grads.relation_rows[k]) *
                                        static_cast<std::ptrdiff_t>(d));
  }

  double worst = 0.0;
  auto probe = [&](std::span<double> params, std::span<const double> grad) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + spec.step;
      const double up = loss_and_grads(table, batch, cfg).loss;
      params[i] = saved - spec.step;
      const double down = loss_and_grads(table, batch, cfg).loss;
      params[i] = saved;
      const double numeric = (up - down) / (2.0 * spec.step);
      const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
    }
  };
  probe(table.entity_data(), analytic.grads.entity);
  probe(table.relation_data(), rel_dense);
  return worst;
}

}  // namespace geome

namespace geome::reference {

LossAndGrads loss_and_grads(const EmbeddingTable& table, std::span<const Triple> batch,
                            const TrainConfig& cfg) {
  validate(table, batch, cfg);
  const auto s = shape_of(table);
  const std::size_t d = table.row_size();
  const std::size_t n = table.num_entities();

  LossAndGrads out;
  out.grads = empty_grads(table, batch, cfg);
  Gradients& g = out.grads;
  std::vector<double> scores(n);
  double loss = 0.0;
  for (const Triple& t : batch) {
    const auto h = table.entity(t.head);
    const auto r = table.relation(t.relation);
    const auto tl = table.entity(t.tail);

    for (std::size_t j = 0; j < n; ++j) scores[j] = kernels::triple_score(s, h, r, table.entity(j));
    loss += softmax_residual(scores, static_cast<std::size_t>(t.tail));
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<std::int32_t>(j);
      kernels::triple_score_grad(s, h, r, table.entity(j), scores[j], entity_grad(g, t.head, d),
                                 relation_grad(g, t.relation, d), entity_grad(g, jj, d));
    }

    for (std::size_t j = 0; j < n; ++j) scores[j] = kernels::triple_score(s, table.entity(j), r, tl);
    loss += softmax_residual(scores, static_cast<std::size_t>(t.head));
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<std::int32_t>(j);
      kernels::triple_score_grad(s, table.entity(j), r, tl, scores[j], entity_grad(g, jj, d),
                                 relation_grad(g, t.relation, d), entity_grad(g, t.tail, d));
    }
  }
  loss += add_penalties(table, batch, cfg, g);
  if (!std::isfinite(loss)) throw TrainingDiverged(0);
  out.loss = loss;
  return out;
}

}  // namespace geome::reference
