#pragma once

// Hand-expanded geometric products on raw coefficient arrays, shared by the
// Multivector API and the embedding kernels. Blade order as in multivector.hpp.

namespace geome::ga::detail {

template <class T>
inline void product1(const T* a, const T* b, T* out) {
  const T s = a[0] * b[0] + a[1] * b[1];
  const T v = a[0] * b[1] + a[1] * b[0];
  out[0] = s;
  out[1] = v;
}

template <class T>
inline void product2(const T* a, const T* b, T* out) {
  const T a0 = a[0], a1 = a[1], a2 = a[2], a12 = a[3];
  const T b0 = b[0], b1 = b[1], b2 = b[2], b12 = b[3];
  const T c0 = a0 * b0 + a1 * b1 + a2 * b2 - a12 * b12;
  const T c1 = a0 * b1 + a1 * b0 - a2 * b12 + a12 * b2;
  const T c2 = a0 * b2 + a1 * b12 + a2 * b0 - a12 * b1;
  const T c12 = a0 * b12 + a1 * b2 - a2 * b1 + a12 * b0;
  out[0] = c0;
  out[1] = c1;
  out[2] = c2;
  out[3] = c12;
}

template <class T>
inline void product3(const T* a, const T* b, T* out) {
  const T a0 = a[0], a1 = a[1], a2 = a[2], a3 = a[3];
  const T a12 = a[4], a23 = a[5], a13 = a[6], a123 = a[7];
  const T b0 = b[0], b1 = b[1], b2 = b[2], b3 = b[3];
  const T b12 = b[4], b23 = b[5], b13 = b[6], b123 = b[7];
  const T c0 = a0 * b0 + a1 * b1 + a2 * b2 + a3 * b3 - a12 * b12 - a23 * b23 - a13 * b13 -
               a123 * b123;
  const T c1 = a0 * b1 + a1 * b0 - a2 * b12 + a12 * b2 - a3 * b13 + a13 * b3 - a23 * b123 -
               a123 * b23;
  const T c2 = a0 * b2 + a2 * b0 + a1 * b12 - a12 * b1 - a3 * b23 + a23 * b3 + a13 * b123 +
               a123 * b13;
  const T c3 = a0 * b3 + a3 * b0 + a1 * b13 - a13 * b1 + a2 * b23 - a23 * b2 - a12 * b123 -
               a123 * b12;
  const T c12 = a0 * b12 + a12 * b0 + a1 * b2 - a2 * b1 - a13 * b23 + a23 * b13 + a3 * b123 +
                a123 * b3;
  const T c23 = a0 * b23 + a23 * b0 + a1 * b123 + a123 * b1 + a2 * b3 - a3 * b2 - a12 * b13 +
                a13 * b12;
  const T c13 = a0 * b13 + a13 * b0 + a1 * b3 - a3 * b1 - a2 * b123 - a123 * b2 + a12 * b23 -
                a23 * b12;
  const T c123 = a0 * b123 + a123 * b0 + a1 * b23 + a23 * b1 - a2 * b13 - a13 * b2 + a3 * b12 +
                 a12 * b3;
  out[0] = c0;
  out[1] = c1;
  out[2] = c2;
  out[3] = c3;
  out[4] = c12;
  out[5] = c23;
  out[6] = c13;
  out[7] = c123;
}

// Dispatch on blade count (2, 4 or 8).
template <class T>
inline void product(int blades, const T* a, const T* b, T* out) {
  switch (blades) {
    case 2: product1(a, b, out); break;
    case 4: product2(a, b, out); break;
    default: product3(a, b, out); break;
  }
}

// Sc(h * r * conj(t)) for a single component, expanded per grade.
template <class T>
inline T triple_scalar1(const T* h, const T* r, const T* t) {
  const T x0 = h[0] * r[0] + h[1] * r[1];
  const T x1 = h[0] * r[1] + h[1] * r[0];
  return x0 * t[0] - x1 * t[1];
}

template <class T>
inline T triple_scalar2(const T* h, const T* r, const T* t) {
  const T h0 = h[0], h1 = h[1], h2 = h[2], h12 = h[3];
  const T r0 = r[0], r1 = r[1], r2 = r[2], r12 = r[3];
  return (h0 * r0 + h1 * r1 + h2 * r2 - h12 * r12) * t[0] -
         (h0 * r1 + h1 * r0 - h2 * r12 + h12 * r2) * t[1] -
         (h0 * r2 + h2 * r0 + h1 * r12 - h12 * r1) * t[2] +
         (h1 * r2 - h2 * r1 + h0 * r12 + h12 * r0) * t[3];
}

// The trivector term enters with a minus sign: conj keeps e123 and
// (e123)^2 = -1.
template <class T>
inline T triple_scalar3(const T* h, const T* r, const T* t) {
  const T h0 = h[0], h1 = h[1], h2 = h[2], h3 = h[3];
  const T h12 = h[4], h23 = h[5], h13 = h[6], h123 = h[7];
  const T r0 = r[0], r1 = r[1], r2 = r[2], r3 = r[3];
  const T r12 = r[4], r23 = r[5], r13 = r[6], r123 = r[7];
  return (h0 * r0 + h1 * r1 + h2 * r2 + h3 * r3 - h12 * r12 - h23 * r23 - h13 * r13 -
          h123 * r123) * t[0] -
         (h0 * r1 + h1 * r0 - h2 * r12 + h12 * r2 - h3 * r13 + h13 * r3 - h23 * r123 -
          h123 * r23) * t[1] -
         (h0 * r2 + h2 * r0 + h1 * r12 - h12 * r1 - h3 * r23 + h23 * r3 + h13 * r123 +
          h123 * r13) * t[2] -
         (h0 * r3 + h3 * r0 + h1 * r13 - h13 * r1 + h2 * r23 - h23 * r2 - h12 * r123 -
          h123 * r12) * t[3] +
         (h0 * r12 + h12 * r0 + h1 * r2 - h2 * r1 - h13 * r23 + h23 * r13 + h3 * r123 +
          h123 * r3) * t[4] +
         (h0 * r23 + h23 * r0 + h1 * r123 + h123 * r1 + h2 * r3 - h3 * r2 - h12 * r13 +
          h13 * r12) * t[5] +
         (h0 * r13 + h13 * r0 + h1 * r3 - h3 * r1 - h2 * r123 - h123 * r2 + h12 * r23 -
          h23 * r12) * t[6] -
         (h0 * r123 + h123 * r0 + h1 * r23 + h23 * r1 - h2 * r13 - h13 * r2 + h3 * r12 +
          h12 * r3) * t[7];
}

}  // namespace geome::ga::detail
