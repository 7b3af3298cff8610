// Exact rational arithmetic helpers shared by the oracles and the exact LP solver.
#pragma once

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace relax {

using Rational = mpq_class;

/// Exact conversion of a finite double to a rational.
inline Rational to_rational(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value cannot be converted to a rational");
  return Rational(v);
}

/// num / den in canonical form (GMP's two-argument constructor does not reduce).
inline Rational frac(long num, long den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline double to_double(const Rational& q) { return q.get_d(); }
inline double to_double(double v) { return v; }

/// 2^k for any integer k, in the requested number type.
template <class T>
T pow2(int k) {
  if constexpr (std::is_same_v<T, Rational>) {
    Rational r(1);
    if (k >= 0)
      mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), static_cast<mp_bitcnt_t>(k));
    else
      mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-k));
    return r;
  } else {
    return std::ldexp(T(1), k);
  }
}

/// floor(v) as a signed integer.
template <class T>
long floor_int(const T& v) {
  if constexpr (std::is_same_v<T, Rational>) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
    return q.get_si();
  } else {
    return static_cast<long>(std::floor(v));
  }
}

/// True when v is an integer.
template <class T>
bool is_integer(const T& v) {
  if constexpr (std::is_same_v<T, Rational>) {
    return v.get_den() == 1;
  } else {
    return v == std::floor(v);
  }
}

template <class T>
T tmin(const T& a, const T& b) { return b < a ? T(b) : T(a); }
template <class T>
T tmax(const T& a, const T& b) { return a < b ? T(b) : T(a); }

/// Human-readable exact representation ("p/q" or "p").
inline std::string str(const Rational& q) { return q.get_str(); }

}  // namespace relax
