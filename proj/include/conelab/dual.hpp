#pragma once

// Forward-mode dual numbers. Dual<double> carries one directional derivative,
// Dual<Dual<double>> carries two (enough for second partials of a metric).

#include <cmath>
#include <type_traits>

namespace conelab {

template <class T>
struct Dual {
  T v{};  // value
  T d{};  // derivative along the seeded direction

  constexpr Dual() = default;
  constexpr Dual(const T& value) : v(value), d(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(const T& value, const T& deriv) : v(value), d(deriv) {}
  template <class U = T>
    requires(!std::is_same_v<U, double>)
  constexpr Dual(double value) : v(value), d(0.0) {}  // NOLINT(google-explicit-constructor)

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

  friend Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
  friend Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
  friend Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    T inv = T(1.0) / b.v;
    return {a.v * inv, (a.d * b.v - a.v * b.d) * inv * inv};
  }
  friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
  friend Dual operator+(const Dual& a) { return a; }

  friend Dual operator+(const Dual& a, double b) { return {a.v + b, a.d}; }
  friend Dual operator+(double a, const Dual& b) { return {a + b.v, b.d}; }
  friend Dual operator-(const Dual& a, double b) { return {a.v - b, a.d}; }
  friend Dual operator-(double a, const Dual& b) { return {a - b.v, -b.d}; }
  friend Dual operator*(const Dual& a, double b) { return {a.v * b, a.d * b}; }
  friend Dual operator*(double a, const Dual& b) { return {a * b.v, a * b.d}; }
  friend Dual operator/(const Dual& a, double b) { return {a.v / b, a.d / b}; }
  friend Dual operator/(double a, const Dual& b) { return Dual(T(a)) / b; }
};

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual1>;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

// Innermost double value.
inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) { return primal(x.v); }

template <class T>
bool operator<(const Dual<T>& a, const Dual<T>& b) { return primal(a) < primal(b); }
template <class T>
bool operator>(const Dual<T>& a, const Dual<T>& b) { return primal(a) > primal(b); }
template <class T>
bool operator<(const Dual<T>& a, double b) { return primal(a) < b; }
template <class T>
bool operator>(const Dual<T>& a, double b) { return primal(a) > b; }

// Exactly zero in every component (used to skip log terms in pow).
inline bool is_exact_zero(double x) { return x == 0.0; }
template <class T>
bool is_exact_zero(const Dual<T>& x) { return is_exact_zero(x.v) && is_exact_zero(x.d); }

using std::abs, std::atan, std::atanh, std::asinh, std::cos, std::cosh, std::exp, std::log,
    std::pow, std::sin, std::sinh, std::sqrt, std::tan, std::tanh;

template <class T>
Dual<T> sin(const Dual<T>& x) { return {sin(x.v), cos(x.v) * x.d}; }
template <class T>
Dual<T> cos(const Dual<T>& x) { return {cos(x.v), -sin(x.v) * x.d}; }
template <class T>
Dual<T> tan(const Dual<T>& x) {
  T t = tan(x.v);
  return {t, (1.0 + t * t) * x.d};
}
template <class T>
Dual<T> sinh(const Dual<T>& x) { return {sinh(x.v), cosh(x.v) * x.d}; }
template <class T>
Dual<T> cosh(const Dual<T>& x) { return {cosh(x.v), sinh(x.v) * x.d}; }
template <class T>
Dual<T> tanh(const Dual<T>& x) {
  T t = tanh(x.v);
  return {t, (1.0 - t * t) * x.d};
}
template <class T>
Dual<T> exp(const Dual<T>& x) {
  T e = exp(x.v);
  return {e, e * x.d};
}
template <class T>
Dual<T> log(const Dual<T>& x) { return {log(x.v), x.d / x.v}; }
template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  T s = sqrt(x.v);
  return {s, x.d / (2.0 * s)};
}
template <class T>
Dual<T> atan(const Dual<T>& x) { return {atan(x.v), x.d / (1.0 + x.v * x.v)}; }
template <class T>
Dual<T> atanh(const Dual<T>& x) { return {atanh(x.v), x.d / (1.0 - x.v * x.v)}; }
template <class T>
Dual<T> asinh(const Dual<T>& x) { return {asinh(x.v), x.d / sqrt(1.0 + x.v * x.v)}; }
template <class T>
Dual<T> abs(const Dual<T>& x) { return primal(x) < 0.0 ? -x : x; }

// x^p for a constant real exponent.
template <class T>
Dual<T> pow(const Dual<T>& x, double p) {
  if (p == 0.0) return Dual<T>(T(1.0));
  if (p == 1.0) return x;
  if (p == 2.0) return x * x;
  return {pow(x.v, p), p * pow(x.v, p - 1.0) * x.d};
}

template <class T>
Dual<T> pow(const Dual<T>& x, const Dual<T>& p) {
  if (is_exact_zero(p.d)) {
    return {pow(x.v, p.v), p.v * pow(x.v, p.v - 1.0) * x.d};
  }
  T value = pow(x.v, p.v);
  return {value, p.v * pow(x.v, p.v - 1.0) * x.d + value * log(x.v) * p.d};
}

}  // namespace conelab
