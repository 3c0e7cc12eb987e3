#include "geome/multivector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "geome/detail/expansions.hpp"

namespace geome::ga {
namespace {

constexpr std::array<unsigned, 2> kMasks1{0b0, 0b1};
constexpr std::array<unsigned, 4> kMasks2{0b00, 0b01, 0b10, 0b11};
constexpr std::array<unsigned, 8> kMasks3{0b000, 0b001, 0b010, 0b100,
                                          0b011, 0b110, 0b101, 0b111};

constexpr double involution_sign(int k, bool invert, bool reverse) {
  double s = 1.0;
  if (invert && (k % 2) == 1) s = -s;
  if (reverse && ((k * (k - 1) / 2) % 2) == 1) s = -s;
  return s;
}

struct SignTables {
  std::array<double, kMaxBlades> square{};
  std::array<double, kMaxBlades> conj{};
  std::array<double, kMaxBlades> tail{};
};

SignTables make_tables(Grade g) {
  SignTables t;
  const auto masks = blade_masks(g);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const int k = std::popcount(masks[i]);
    // (e_{i1}...e_{ik})^2 = (-1)^{k(k-1)/2} for a Euclidean metric
    t.square[i] = involution_sign(k, false, true);
    t.conj[i] = involution_sign(k, true, true);
    t.tail[i] = t.square[i] * t.conj[i];
  }
  return t;
}

const SignTables& tables(Grade g) {
  static const SignTables t1 = make_tables(Grade::one);
  static const SignTables t2 = make_tables(Grade::two);
  static const SignTables t3 = make_tables(Grade::three);
  switch (g) {
    case Grade::one: return t1;
    case Grade::two: return t2;
    default: return t3;
  }
}

void require_same_grade(const Multivector& a, const Multivector& b) {
  if (a.grade() != b.grade()) {
    throw std::invalid_argument("multivector grade mismatch: " +
                                std::to_string(static_cast<int>(a.grade())) + " vs " +
                                std::to_string(static_cast<int>(b.grade())));
  }
}

Multivector apply_signs(const Multivector& m, bool invert, bool reverse) {
  Multivector out(m.grade());
  const auto masks = blade_masks(m.grade());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[i] = involution_sign(std::popcount(masks[i]), invert, reverse) * m[i];
  }
  return out;
}

}  // namespace

Grade grade_from_int(int n) {
  if (n < 1 || n > 3) throw std::invalid_argument("grade must be 1, 2 or 3, got " + std::to_string(n));
  return static_cast<Grade>(n);
}

std::span<const unsigned> blade_masks(Grade g) {
  switch (g) {
    case Grade::one: return kMasks1;
    case Grade::two: return kMasks2;
    default: return kMasks3;
  }
}

int blade_grade(Grade g, std::size_t slot) { return std::popcount(blade_masks(g)[slot]); }

std::size_t e12_slot(Grade g) {
  if (g == Grade::one) throw std::invalid_argument("grade 1 has no bivector");
  return g == Grade::two ? 3 : 4;
}

std::span<const double> square_signs(Grade g) { return {tables(g).square.data(), blade_count(g)}; }
std::span<const double> conjugation_signs(Grade g) { return {tables(g).conj.data(), blade_count(g)}; }
std::span<const double> tail_pairing_mask(Grade g) { return {tables(g).tail.data(), blade_count(g)}; }

Multivector::Multivector(Grade g, std::span<const double> coeffs) : grade_(g) {
  if (coeffs.size() != blade_count(g)) {
    throw std::invalid_argument("expected " + std::to_string(blade_count(g)) +
                                " coefficients, got " + std::to_string(coeffs.size()));
  }
  std::copy(coeffs.begin(), coeffs.end(), c_.begin());
}

Multivector::Multivector(Grade g, std::initializer_list<double> coeffs)
    : Multivector(g, std::span<const double>(coeffs.begin(), coeffs.size())) {}

Multivector Multivector::scalar(Grade g, double value) {
  Multivector m(g);
  m[0] = value;
  return m;
}

Multivector operator+(const Multivector& a, const Multivector& b) {
  require_same_grade(a, b);
  Multivector out(a.grade());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Multivector operator-(const Multivector& a, const Multivector& b) {
  require_same_grade(a, b);
  Multivector out(a.grade());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Multivector operator*(double s, const Multivector& m) {
  Multivector out(m.grade());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = s * m[i];
  return out;
}

Multivector product(const Multivector& a, const Multivector& b) {
  require_same_grade(a, b);
  Multivector out(a.grade());
  detail::product(static_cast<int>(a.size()), a.coeffs().data(), b.coeffs().data(),
                  out.coeffs().data());
  return out;
}

Involutions involutions(const Multivector& m) {
  return {apply_signs(m, true, false), apply_signs(m, false, true), apply_signs(m, true, true)};
}

Multivector conjugate(const Multivector& m) { return apply_signs(m, true, true); }

double norm(const Multivector& m) {
  double s = 0.0;
  for (double c : m.coeffs()) s += c * c;
  return std::sqrt(s);
}

void MatrixForm::apply(std::span<const double> in, std::span<double> out) const {
  const std::size_t n = size();
  if (in.size() != n || out.size() != n) throw std::invalid_argument("matrix form size mismatch");
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += at(r, c) * in[c];
    out[r] = acc;
  }
}

MatrixForm matrix_form(const Multivector& m) {
  MatrixForm f{m.grade()};
  const std::size_t n = m.size();
  // Column j is m * (unit blade j).
  for (std::size_t j = 0; j < n; ++j) {
    Multivector unit(m.grade());
    unit[j] = 1.0;
    const Multivector col = product(m, unit);
    for (std::size_t i = 0; i < n; ++i) f.mat[i * n + j] = col[i];
  }
  const auto masks = blade_masks(m.grade());
  for (std::size_t i = 0; i < n; ++i) f.sign_mask[i] = std::popcount(masks[i]) == 1 ? -1.0 : 1.0;
  return f;
}

MatrixForm compose(const MatrixForm& a, const MatrixForm& b) {
  if (a.grade != b.grade) throw std::invalid_argument("matrix form grade mismatch");
  MatrixForm out{a.grade};
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += a.at(i, k) * b.at(k, j);
      out.mat[i * n + j] = acc;
    }
  }
  out.sign_mask = a.sign_mask;
  return out;
}

ScalarSplit scalar_split(const Multivector& m) {
  double s = 0.0;
  for (std::size_t i = 1; i < m.size(); ++i) s += m[i] * m[i];
  return {m[0], std::sqrt(s)};
}

}  // namespace geome::ga
