#include "geome/kernels.hpp"

#include <cassert>
#include <cstddef>
#include <stdexcept>

#include "geome/detail/expansions.hpp"

namespace geome::kernels {
namespace {

using ga::detail::product;

inline double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void check_row(Shape s, std::span<const double> row) {
  if (row.size() != s.row_size()) throw std::invalid_argument("embedding row has wrong size");
}

}  // namespace

void tail_query(Shape s, std::span<const double> h, std::span<const double> r,
                std::span<double> out) {
  check_row(s, h);
  check_row(s, r);
  const int nb = static_cast<int>(s.blades());
  const double* mask = ga::tail_pairing_mask(s.grade).data();
  for (std::size_t i = 0; i < s.dim_k; ++i) {
    const std::size_t off = i * nb;
    double x[ga::kMaxBlades];
    product(nb, h.data() + off, r.data() + off, x);
    for (int b = 0; b < nb; ++b) out[off + b] = mask[b] * x[b];
  }
}

void head_query(Shape s, std::span<const double> r, std::span<const double> t,
                std::span<double> out) {
  check_row(s, r);
  check_row(s, t);
  const int nb = static_cast<int>(s.blades());
  const double* sq = ga::square_signs(s.grade).data();
  const double* conj = ga::conjugation_signs(s.grade).data();
  for (std::size_t i = 0; i < s.dim_k; ++i) {
    const std::size_t off = i * nb;
    double u[ga::kMaxBlades];
    double p[ga::kMaxBlades];
    for (int b = 0; b < nb; ++b) u[b] = conj[b] * t[off + b];
    product(nb, r.data() + off, u, p);
    for (int b = 0; b < nb; ++b) out[off + b] = sq[b] * p[b];
  }
}

void tail_query_backward(Shape s, std::span<const double> h, std::span<const double> r,
                         std::span<const double> g, std::span<double> grad_h,
                         std::span<double> grad_r) {
  const int nb = static_cast<int>(s.blades());
  const double* sq = ga::square_signs(s.grade).data();
  const double* conj = ga::conjugation_signs(s.grade).data();
  for (std::size_t i = 0; i < s.dim_k; ++i) {
    const std::size_t off = i * nb;
    // <g, mask .* (h r)> = Sc(g' h r) with g' = conj .* g
    double gp[ga::kMaxBlades];
    double tmp[ga::kMaxBlades];
    for (int b = 0; b < nb; ++b) gp[b] = conj[b] * g[off + b];
    product(nb, r.data() + off, gp, tmp);
    for (int b = 0; b < nb; ++b) grad_h[off + b] += sq[b] * tmp[b];
    product(nb, gp, h.data() + off, tmp);
    for (int b = 0; b < nb; ++b) grad_r[off + b] += sq[b] * tmp[b];
  }
}

void head_query_backward(Shape s, std::span<const double> r, std::span<const double> t,
                         std::span<const double> g, std::span<double> grad_r,
                         std::span<double> grad_t) {
  const int nb = static_cast<int>(s.blades());
  const double* sq = ga::square_signs(s.grade).data();
  const double* conj = ga::conjugation_signs(s.grade).data();
  for (std::size_t i = 0; i < s.dim_k; ++i) {
    const std::size_t off = i * nb;
    // <g, sq .* (r u)> = Sc(g r u) with u = conj(t)
    double u[ga::kMaxBlades];
    double tmp[ga::kMaxBlades];
    for (int b = 0; b < nb; ++b) u[b] = conj[b] * t[off + b];
    product(nb, u, g.data() + off, tmp);
    for (int b = 0; b < nb; ++b) grad_r[off + b] += sq[b] * tmp[b];
    product(nb, g.data() + off, r.data() + off, tmp);
    for (int b = 0; b < nb; ++b) grad_t[off + b] += conj[b] * sq[b] * tmp[b];
  }
}

double triple_score(Shape s, std::span<const double> h, std::span<const double> r,
                    std::span<const double> t) {
  check_row(s, h);
  check_row(s, r);
  check_row(s, t);
  const std::size_t nb = s.blades();
  double acc = 0.0;
  switch (s.grade) {
    case Grade::one:
      for (std::size_t i = 0; i < s.dim_k; ++i)
        acc += ga::detail::triple_scalar1(h.data() + i * nb, r.data() + i * nb, t.data() + i * nb);
      break;
    case Grade::two:
      for (std::size_t i = 0; i < s.dim_k; ++i)
        acc += ga::detail::triple_scalar2(h.data() + i * nb, r.data() + i * nb, t.data() + i * nb);
      break;
    case Grade::three:
      for (std::size_t i = 0; i < s.dim_k; ++i)
        acc += ga::detail::triple_scalar3(h.data() + i * nb, r.data() + i * nb, t.data() + i * nb);
      break;
  }
  return acc;
}

void triple_score_grad(Shape s, std::span<const double> h, std::span<const double> r,
                       std::span<const double> t, double weight, std::span<double> grad_h,
                       std::span<double> grad_r, std::span<double> grad_t) {
  const int nb = static_cast<int>(s.blades());
  const double* sq = ga::square_signs(s.grade).data();
  const double* conj = ga::conjugation_signs(s.grade).data();
  const double* tail = ga::tail_pairing_mask(s.grade).data();
  for (std::size_t i = 0; i < s.dim_k; ++i) {
    const std::size_t off = i * nb;
    double u[ga::kMaxBlades];
    double tmp[ga::kMaxBlades];
    for (int b = 0; b < nb; ++b) u[b] = conj[b] * t[off + b];
    // d/dh: sq .* (r conj(t))
    product(nb, r.data() + off, u, tmp);
    for (int b = 0; b < nb; ++b) grad_h[off + b] += weight * sq[b] * tmp[b];
    // d/dr: sq .* (conj(t) h)
    product(nb, u, h.data() + off, tmp);
    for (int b = 0; b < nb; ++b) grad_r[off + b] += weight * sq[b] * tmp[b];
    // d/dt: tail_mask .* (h r)
    product(nb, h.data() + off, r.data() + off, tmp);
    for (int b = 0; b < nb; ++b) grad_t[off + b] += weight * tail[b] * tmp[b];
  }
}

void score_rows(std::span<const double> rows, std::size_t row_size,
                std::span<const double> query, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  assert(rows.size() == out.size() * row_size && query.size() == row_size);
  const double* base = rows.data();
  const double* q = query.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = dot(base + j * row_size, q, row_size);
}

void block_scores(std::span<const double> rows, std::size_t row_size,
                  std::span<const double> queries, std::span<double> out) {
  const std::size_t n = rows.size() / row_size;
  const std::size_t nq = queries.size() / row_size;
  assert(out.size() == n * nq);
  const double* base = rows.data();
  const double* q = queries.data();
  double* o = out.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
    const double* row = base + j * row_size;
    for (std::size_t c = 0; c < nq; ++c) o[c * n + j] = dot(row, q + c * row_size, row_size);
  }
}

void block_row_grads(std::size_t row_size, std::span<const double> queries,
                     std::span<const double> coef, std::span<double> grad_rows) {
  const std::size_t n = grad_rows.size() / row_size;
  const std::size_t nq = queries.size() / row_size;
  assert(coef.size() == n * nq);
  const double* q = queries.data();
  const double* w = coef.data();
  double* g = grad_rows.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
    double* row = g + j * row_size;
    for (std::size_t c = 0; c < nq; ++c) {
      const double a = w[c * n + j];
      if (a != 0.0) axpy(a, q + c * row_size, row, row_size);
    }
  }
}

void block_query_grads(std::span<const double> rows, std::size_t row_size,
                       std::span<const double> coef, std::span<double> out) {
  const std::size_t n = rows.size() / row_size;
  const std::size_t nq = out.size() / row_size;
  assert(coef.size() == n * nq);
  const double* base = rows.data();
  const double* w = coef.data();
  double* o = out.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(nq); ++c) {
    double* dst = o + c * row_size;
    for (std::size_t i = 0; i < row_size; ++i) dst[i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = w[c * n + j];
      if (a != 0.0) axpy(a, base + j * row_size, dst, row_size);
    }
  }
}

}  // namespace geome::kernels

namespace geome::reference {

std::vector<double> score_all(const EmbeddingTable& table, std::size_t fixed, std::size_t r,
                              Side side) {
  std::vector<double> out(table.num_entities());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = side == Side::replace_tail ? score_triple(table, fixed, r, j)
                                        : score_triple(table, j, r, fixed);
  }
  return out;
}

}  // namespace geome::reference
