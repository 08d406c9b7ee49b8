#pragma once

// Forward-mode differentiation types.
//
// Jet<N> carries a value, its gradient and its (symmetric, packed) Hessian
// with respect to N independent variables. Dual<T> is a first-order dual
// number over an arbitrary scalar type, so Dual<Jet<N>> yields third-order
// information, which is what an induced metric g = DF^T DF needs to produce
// Christoffel symbols and their derivatives from a single embedding map F.

#include <array>
#include <cmath>

namespace mppgeo {

template <int N>
struct Jet {
  static_assert(N >= 1, "Jet needs at least one variable");
  static constexpr int kPacked = N * (N + 1) / 2;

  double v = 0.0;
  std::array<double, N> d{};
  std::array<double, kPacked> h{};

  constexpr Jet() = default;
  constexpr Jet(double value) : v(value) {}  // NOLINT: implicit constants

  static constexpr int packed(int a, int b) {
    if (a > b) {
      const int t = a;
      a = b;
      b = t;
    }
    // row-major upper triangle
    return a * N - a * (a - 1) / 2 + (b - a);
  }

  static Jet variable(double value, int index) {
    Jet j(value);
    j.d[index] = 1.0;
    return j;
  }

  double hess(int a, int b) const { return h[packed(a, b)]; }
};

namespace jet_detail {

// y = f(x) given f, f', f'' at x.v
template <int N>
inline Jet<N> chain(const Jet<N>& x, double f0, double f1, double f2) {
  Jet<N> r(f0);
  for (int a = 0; a < N; ++a) r.d[a] = f1 * x.d[a];
  int p = 0;
  for (int a = 0; a < N; ++a) {
    for (int b = a; b < N; ++b, ++p) r.h[p] = f1 * x.h[p] + f2 * x.d[a] * x.d[b];
  }
  return r;
}

}  // namespace jet_detail

template <int N>
inline Jet<N> operator+(const Jet<N>& x) {
  return x;
}
template <int N>
inline Jet<N> operator-(const Jet<N>& x) {
  Jet<N> r;
  r.v = -x.v;
  for (int a = 0; a < N; ++a) r.d[a] = -x.d[a];
  for (int p = 0; p < Jet<N>::kPacked; ++p) r.h[p] = -x.h[p];
  return r;
}
template <int N>
inline Jet<N> operator+(const Jet<N>& x, const Jet<N>& y) {
  Jet<N> r;
  r.v = x.v + y.v;
  for (int a = 0; a < N; ++a) r.d[a] = x.d[a] + y.d[a];
  for (int p = 0; p < Jet<N>::kPacked; ++p) r.h[p] = x.h[p] + y.h[p];
  return r;
}
template <int N>
inline Jet<N> operator-(const Jet<N>& x, const Jet<N>& y) {
  Jet<N> r;
  r.v = x.v - y.v;
  for (int a = 0; a < N; ++a) r.d[a] = x.d[a] - y.d[a];
  for (int p = 0; p < Jet<N>::kPacked; ++p) r.h[p] = x.h[p] - y.h[p];
  return r;
}
template <int N>
inline Jet<N> operator*(const Jet<N>& x, const Jet<N>& y) {
  Jet<N> r;
  r.v = x.v * y.v;
  for (int a = 0; a < N; ++a) r.d[a] = x.v * y.d[a] + y.v * x.d[a];
  int p = 0;
  for (int a = 0; a < N; ++a) {
    for (int b = a; b < N; ++b, ++p) {
      r.h[p] = x.v * y.h[p] + y.v * x.h[p] + x.d[a] * y.d[b] + x.d[b] * y.d[a];
    }
  }
  return r;
}
template <int N>
inline Jet<N> operator+(const Jet<N>& x, double c) {
  Jet<N> r = x;
  r.v += c;
  return r;
}
template <int N>
inline Jet<N> operator+(double c, const Jet<N>& x) {
  return x + c;
}
template <int N>
inline Jet<N> operator-(const Jet<N>& x, double c) {
  Jet<N> r = x;
  r.v -= c;
  return r;
}
template <int N>
inline Jet<N> operator-(double c, const Jet<N>& x) {
  Jet<N> r = -x;
  r.v += c;
  return r;
}
template <int N>
inline Jet<N> operator*(const Jet<N>& x, double c) {
  Jet<N> r;
  r.v = x.v * c;
  for (int a = 0; a < N; ++a) r.d[a] = x.d[a] * c;
  for (int p = 0; p < Jet<N>::kPacked; ++p) r.h[p] = x.h[p] * c;
  return r;
}
template <int N>
inline Jet<N> operator*(double c, const Jet<N>& x) {
  return x * c;
}
template <int N>
inline Jet<N> operator/(const Jet<N>& x, double c) {
  return x * (1.0 / c);
}
template <int N>
inline Jet<N> reciprocal(const Jet<N>& x) {
  const double r = 1.0 / x.v;
  return jet_detail::chain(x, r, -r * r, 2.0 * r * r * r);
}
template <int N>
inline Jet<N> operator/(const Jet<N>& x, const Jet<N>& y) {
  return x * reciprocal(y);
}
template <int N>
inline Jet<N> operator/(double c, const Jet<N>& y) {
  return c * reciprocal(y);
}
template <int N>
inline Jet<N>& operator+=(Jet<N>& x, const Jet<N>& y) {
  return x = x + y;
}
template <int N>
inline Jet<N>& operator-=(Jet<N>& x, const Jet<N>& y) {
  return x = x - y;
}
template <int N>
inline Jet<N>& operator*=(Jet<N>& x, const Jet<N>& y) {
  return x = x * y;
}

template <int N>
inline Jet<N> sqrt(const Jet<N>& x) {
  const double s = std::sqrt(x.v);
  return jet_detail::chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}
template <int N>
inline Jet<N> exp(const Jet<N>& x) {
  const double e = std::exp(x.v);
  return jet_detail::chain(x, e, e, e);
}
template <int N>
inline Jet<N> log(const Jet<N>& x) {
  return jet_detail::chain(x, std::log(x.v), 1.0 / x.v, -1.0 / (x.v * x.v));
}
template <int N>
inline Jet<N> sin(const Jet<N>& x) {
  const double s = std::sin(x.v);
  return jet_detail::chain(x, s, std::cos(x.v), -s);
}
template <int N>
inline Jet<N> cos(const Jet<N>& x) {
  const double c = std::cos(x.v);
  return jet_detail::chain(x, c, -std::sin(x.v), -c);
}

/// First-order dual number over scalar T.
template <class T>
struct Dual {
  T v{};
  T e{};

  Dual() = default;
  Dual(double c) : v(c), e(0.0) {}  // NOLINT: implicit constants
  Dual(const T& value, const T& eps) : v(value), e(eps) {}
};

template <class T>
inline Dual<T> operator-(const Dual<T>& x) {
  return {-x.v, -x.e};
}
template <class T>
inline Dual<T> operator+(const Dual<T>& x, const Dual<T>& y) {
  return {x.v + y.v, x.e + y.e};
}
template <class T>
inline Dual<T> operator-(const Dual<T>& x, const Dual<T>& y) {
  return {x.v - y.v, x.e - y.e};
}
template <class T>
inline Dual<T> operator*(const Dual<T>& x, const Dual<T>& y) {
  return {x.v * y.v, x.v * y.e + x.e * y.v};
}
template <class T>
inline Dual<T> operator/(const Dual<T>& x, const Dual<T>& y) {
  const T inv = 1.0 / y.v;
  return {x.v * inv, (x.e - x.v * inv * y.e) * inv};
}
template <class T>
inline Dual<T> operator+(const Dual<T>& x, double c) {
  return {x.v + c, x.e};
}
template <class T>
inline Dual<T> operator+(double c, const Dual<T>& x) {
  return {x.v + c, x.e};
}
template <class T>
inline Dual<T> operator-(const Dual<T>& x, double c) {
  return {x.v - c, x.e};
}
template <class T>
inline Dual<T> operator-(double c, const Dual<T>& x) {
  return {c - x.v, -x.e};
}
template <class T>
inline Dual<T> operator*(const Dual<T>& x, double c) {
  return {x.v * c, x.e * c};
}
template <class T>
inline Dual<T> operator*(double c, const Dual<T>& x) {
  return {x.v * c, x.e * c};
}
template <class T>
inline Dual<T> operator/(const Dual<T>& x, double c) {
  return {x.v / c, x.e / c};
}
template <class T>
inline Dual<T> operator/(double c, const Dual<T>& y) {
  return Dual<T>(c) / y;
}

template <class T>
inline Dual<T> sqrt(const Dual<T>& x) {
  using std::sqrt;
  const T s = sqrt(x.v);
  return {s, x.e / (2.0 * s)};
}
template <class T>
inline Dual<T> exp(const Dual<T>& x) {
  using std::exp;
  const T e = exp(x.v);
  return {e, e * x.e};
}
template <class T>
inline Dual<T> log(const Dual<T>& x) {
  using std::log;
  return {log(x.v), x.e / x.v};
}
template <class T>
inline Dual<T> sin(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {sin(x.v), cos(x.v) * x.e};
}
template <class T>
inline Dual<T> cos(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {cos(x.v), -sin(x.v) * x.e};
}

}  // namespace mppgeo
