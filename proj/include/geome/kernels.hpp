#pragma once

// Row-level kernels behind scoring and training.
//
// Every GeomE score is linear in each argument, so with the fixed pair folded
// into a query vector the score of candidate j is a plain dot product:
//   phi(h, r, t') = <E_t', tail_query(h, r)>,  tail_query = tail_mask .* (h*r)
//   phi(h', r, t) = <E_h', head_query(r, t)>,  head_query = square_signs .* (r*conj(t))
// (per component; see ga::tail_pairing_mask / ga::square_signs).
//
// The block kernels are OpenMP-parallel over disjoint output rows, each
// output element written by a single thread in a fixed summation order, so
// results do not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "geome/model.hpp"

namespace geome::kernels {

struct Shape {
  Grade grade;
  std::size_t dim_k;
  std::size_t blades() const { return ga::blade_count(grade); }
  std::size_t row_size() const { return dim_k * blades(); }
};

void tail_query(Shape s, std::span<const double> h, std::span<const double> r,
                std::span<double> out);
void head_query(Shape s, std::span<const double> r, std::span<const double> t,
                std::span<double> out);

// Vector-Jacobian products of the queries: accumulate d<g, query>/d(arg).
void tail_query_backward(Shape s, std::span<const double> h, std::span<const double> r,
                         std::span<const double> g, std::span<double> grad_h,
                         std::span<double> grad_r);
void head_query_backward(Shape s, std::span<const double> r, std::span<const double> t,
                         std::span<const double> g, std::span<double> grad_r,
                         std::span<double> grad_t);

// Fused score of a single (h, r, t) row triple.
double triple_score(Shape s, std::span<const double> h, std::span<const double> r,
                    std::span<const double> t);

// grad_x += weight * d phi(h, r, t) / dx for x in {h, r, t}.
void triple_score_grad(Shape s, std::span<const double> h, std::span<const double> r,
                       std::span<const double> t, double weight, std::span<double> grad_h,
                       std::span<double> grad_r, std::span<double> grad_t);

// out[j] = <rows_j, query> for every row of a row-major matrix.
void score_rows(std::span<const double> rows, std::size_t row_size,
                std::span<const double> query, std::span<double> out);

// out[c * n + j] = <rows_j, queries_c> for C queries and n rows.
void block_scores(std::span<const double> rows, std::size_t row_size,
                  std::span<const double> queries, std::span<double> out);

// grad_rows_j += sum_c coef[c * n + j] * queries_c.
void block_row_grads(std::size_t row_size, std::span<const double> queries,
                     std::span<const double> coef, std::span<double> grad_rows);

// out_c = sum_j coef[c * n + j] * rows_j.
void block_query_grads(std::span<const double> rows, std::size_t row_size,
                       std::span<const double> coef, std::span<double> out);

}  // namespace geome::kernels

namespace geome::reference {

// Element-wise score_triple over all candidates, serial. Kept as the oracle
// for the parallel score_all.
std::vector<double> score_all(const EmbeddingTable& table, std::size_t fixed, std::size_t r,
                              Side side);

}  // namespace geome::reference
