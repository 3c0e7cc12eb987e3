#pragma once

// Exact Clifford algebras Cl(1), Cl(2), Cl(3) with a Euclidean metric
// (e_i e_i = +1, e_i e_j = -e_j e_i).
//
// Blade order is fixed everywhere (kernels, checkpoints, reports):
//   grade 1: [1, e1]
//   grade 2: [1, e1, e2, e1e2]
//   grade 3: [1, e1, e2, e3, e1e2, e2e3, e1e3, e1e2e3]
//
// Quaternions embed into grade 3 through i -> e1e2, j -> e2e3, k -> e1e3
// (all signs +): ij = k, jk = i, ki = j, ijk = -1. Complex numbers embed
// into grade 2 as a + b i -> a + b e1e2.

#include <array>
#include <cstddef>
#include <span>

namespace geome::ga {

enum class Grade : int { one = 1, two = 2, three = 3 };

inline constexpr std::size_t kMaxBlades = 8;

constexpr std::size_t blade_count(Grade g) { return std::size_t{1} << static_cast<int>(g); }

// Throws std::invalid_argument outside {1, 2, 3}.
Grade grade_from_int(int n);

// Basis-vector bitmask of each blade slot (bit i set <=> e_{i+1} present).
std::span<const unsigned> blade_masks(Grade g);

// Number of basis vectors in the blade at `slot` (0 scalar, 1 vector, ...).
int blade_grade(Grade g, std::size_t slot);

// Slot of the e1e2 bivector: 3 in grade 2, 4 in grade 3.
std::size_t e12_slot(Grade g);

// Sign of (blade)^2 per slot: the scalar part of A*B is sum_b A_b B_b sq_b.
std::span<const double> square_signs(Grade g);

// Sign applied to each slot by Clifford conjugation.
std::span<const double> conjugation_signs(Grade g);

// square_signs * conjugation_signs: Sc(X * conj(T)) = <X, T .* tail_pairing_mask>.
std::span<const double> tail_pairing_mask(Grade g);

class Multivector {
 public:
  explicit Multivector(Grade g) : grade_(g) {}
  // Throws std::invalid_argument if coeffs.size() != blade_count(g).
  Multivector(Grade g, std::span<const double> coeffs);
  Multivector(Grade g, std::initializer_list<double> coeffs);

  static Multivector scalar(Grade g, double value);

  Grade grade() const { return grade_; }
  std::size_t size() const { return blade_count(grade_); }

  std::span<const double> coeffs() const { return {c_.data(), size()}; }
  std::span<double> coeffs() { return {c_.data(), size()}; }

  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }

  double scalar_part() const { return c_[0]; }

  friend bool operator==(const Multivector&, const Multivector&) = default;

 private:
  Grade grade_;
  std::array<double, kMaxBlades> c_{};
};

Multivector operator+(const Multivector& a, const Multivector& b);
Multivector operator-(const Multivector& a, const Multivector& b);
Multivector operator*(double s, const Multivector& m);

// Geometric product. Throws std::invalid_argument on grade mismatch.
Multivector product(const Multivector& a, const Multivector& b);

struct Involutions {
  Multivector space_inversion;
  Multivector reversion;
  Multivector conjugation;
};

Involutions involutions(const Multivector& m);
Multivector conjugate(const Multivector& m);

// Euclidean norm over all blade coefficients.
double norm(const Multivector& m);

// Left-multiplication matrix: mat * coeffs(b) == coeffs(m * b).
struct MatrixForm {
  Grade grade;
  std::array<double, kMaxBlades * kMaxBlades> mat{};  // row-major, size() x size()
  std::array<double, kMaxBlades> sign_mask{};         // -1 on vector blades, +1 elsewhere

  std::size_t size() const { return blade_count(grade); }
  double at(std::size_t row, std::size_t col) const { return mat[row * size() + col]; }
  void apply(std::span<const double> in, std::span<double> out) const;
};

MatrixForm matrix_form(const Multivector& m);

// Product of two left-multiplication matrices of the same grade.
MatrixForm compose(const MatrixForm& a, const MatrixForm& b);

struct ScalarSplit {
  double scalar_blade;
  double nonscalar_norm;
};

ScalarSplit scalar_split(const Multivector& m);

}  // namespace geome::ga
