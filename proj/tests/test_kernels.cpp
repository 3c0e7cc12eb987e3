#include <gtest/gtest.h>
#include <omp.h>

#include <numeric>
#include <random>

#include "geome/kernels.hpp"
#include "oracles.hpp"

using namespace geome;
using namespace geome::kernels;

namespace {

constexpr Grade kGrades[] = {Grade::one, Grade::two, Grade::three};

// Central difference of f along every coordinate of x.
template <typename F>
std::vector<double> numeric_grad(std::vector<double> x, F f, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = x[i];
    x[i] = s + h;
    const double up = f(x);
    x[i] = s - h;
    const double down = f(x);
    x[i] = s;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol * (1 + std::abs(b[i]))) << i;
}

}  // namespace

TEST(Kernels, QueriesReproduceTripleScore) {
  std::mt19937_64 rng(1);
  for (const Grade g : kGrades) {
    const Shape s{g, 3};
    const auto h = oracle::random_vec(rng, s.row_size());
    const auto r = oracle::random_vec(rng, s.row_size());
    const auto t = oracle::random_vec(rng, s.row_size());
    std::vector<double> q(s.row_size());
    const double want = oracle::score(static_cast<int>(g), h, r, t);
    tail_query(s, h, r, q);
    EXPECT_NEAR(std::inner_product(q.begin(), q.end(), t.begin(), 0.0), want, 1e-12);
    head_query(s, r, t, q);
    EXPECT_NEAR(std::inner_product(q.begin(), q.end(), h.begin(), 0.0), want, 1e-12);
    EXPECT_NEAR(triple_score(s, h, r, t), want, 1e-12);
  }
}

TEST(Kernels, RowSizeChecked) {
  const Shape s{Grade::two, 2};
  std::vector<double> a(8), b(7);
  EXPECT_THROW(triple_score(s, a, a, b), std::invalid_argument);
}

TEST(Kernels, TripleScoreGradMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (const Grade g : kGrades) {
    const Shape s{g, 2};
    const auto h = oracle::random_vec(rng, s.row_size());
    const auto r = oracle::random_vec(rng, s.row_size());
    const auto t = oracle::random_vec(rng, s.row_size());
    std::vector<double> gh(s.row_size()), gr(s.row_size()), gt(s.row_size());
    triple_score_grad(s, h, r, t, 1.0, gh, gr, gt);
    expect_close(gh, numeric_grad(h, [&](const auto& x) { return triple_score(s, x, r, t); }), 1e-7);
    expect_close(gr, numeric_grad(r, [&](const auto& x) { return triple_score(s, h, x, t); }), 1e-7);
    expect_close(gt, numeric_grad(t, [&](const auto& x) { return triple_score(s, h, r, x); }), 1e-7);
  }
}

TEST(Kernels, QueryBackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (const Grade g : kGrades) {
    const Shape s{g, 2};
    const auto a = oracle::random_vec(rng, s.row_size());
    const auto b = oracle::random_vec(rng, s.row_size());
    const auto w = oracle::random_vec(rng, s.row_size());
    auto tail_obj = [&](const std::vector<double>& x, const std::vector<double>& y) {
      std::vector<double> q(s.row_size());
      tail_query(s, x, y, q);
      return std::inner_product(q.begin(), q.end(), w.begin(), 0.0);
    };
    auto head_obj = [&](const std::vector<double>& x, const std::vector<double>& y) {
      std::vector<double> q(s.row_size());
      head_query(s, x, y, q);
      return std::inner_product(q.begin(), q.end(), w.begin(), 0.0);
    };
    std::vector<double> g1(s.row_size()), g2(s.row_size());
    tail_query_backward(s, a, b, w, g1, g2);
    expect_close(g1, numeric_grad(a, [&](const auto& x) { return tail_obj(x, b); }), 1e-7);
    expect_close(g2, numeric_grad(b, [&](const auto& x) { return tail_obj(a, x); }), 1e-7);
    std::fill(g1.begin(), g1.end(), 0.0);
    std::fill(g2.begin(), g2.end(), 0.0);
    head_query_backward(s, a, b, w, g1, g2);
    expect_close(g1, numeric_grad(a, [&](const auto& x) { return head_obj(x, b); }), 1e-7);
    expect_close(g2, numeric_grad(b, [&](const auto& x) { return head_obj(a, x); }), 1e-7);
  }
}

TEST(Kernels, BlockKernelsMatchNaiveLoops) {
  std::mt19937_64 rng(4);
  const std::size_t n = 53, d = 12, c = 5;
  const auto rows = oracle::random_vec(rng, n * d);
  const auto queries = oracle::random_vec(rng, c * d);
  const auto coef = oracle::random_vec(rng, c * n);

  std::vector<double> scores(c * n), grads(n * d, 0.0), qgrads(c * d);
  block_scores(rows, d, queries, scores);
  block_row_grads(d, queries, coef, grads);
  block_query_grads(rows, d, coef, qgrads);

  for (std::size_t q = 0; q < c; ++q) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < d; ++i) s += rows[j * d + i] * queries[q * d + i];
      EXPECT_NEAR(scores[q * n + j], s, 1e-12);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0;
      for (std::size_t q = 0; q < c; ++q) s += coef[q * n + j] * queries[q * d + i];
      EXPECT_NEAR(grads[j * d + i], s, 1e-12);
    }
  }
  for (std::size_t q = 0; q < c; ++q) {
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += coef[q * n + j] * rows[j * d + i];
      EXPECT_NEAR(qgrads[q * d + i], s, 1e-11);
    }
  }

  std::vector<double> one(n);
  score_rows(rows, d, std::span<const double>(queries).first(d), one);
  for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(one[j], scores[j]);
}

TEST(Kernels, ResultsIndependentOfThreadCount) {
  std::mt19937_64 rng(5);
  const std::size_t n = 301, d = 40, c = 7;
  const auto rows = oracle::random_vec(rng, n * d);
  const auto queries = oracle::random_vec(rng, c * d);
  const auto coef = oracle::random_vec(rng, c * n);
  auto run = [&](int threads) {
    omp_set_num_threads(threads);
    std::vector<double> s(c * n), g(n * d, 0.0), q(c * d);
    block_scores(rows, d, queries, s);
    block_row_grads(d, queries, coef, g);
    block_query_grads(rows, d, coef, q);
    s.insert(s.end(), g.begin(), g.end());
    s.insert(s.end(), q.begin(), q.end());
    return s;
  };
  const int saved = omp_get_max_threads();
  const auto a = run(1);
  const auto b = run(4);
  omp_set_num_threads(saved);
  EXPECT_EQ(a, b);
}
