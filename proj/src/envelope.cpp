// Closed-form projections of the per-term MIP relaxations at a fixed point.
#include <stdexcept>

#include "relax/bilinear.hpp"

namespace relax {

namespace {

template <class T>
T num(double v) {
  if constexpr (std::is_same_v<T, Rational>)
    return to_rational(v);
  else
    return v;
}

template <class T>
void check_inside(const T& v, const Interval& b) {
  if (v < num<T>(b.lo) || v > num<T>(b.hi)) throw std::domain_error("envelope: point outside box");
}

/// Floating-point rounding may push a mapped coordinate just outside [0,1].
template <class T>
T clamp01(const T& v) {
  if constexpr (std::is_same_v<T, double>) return v < 0 ? 0.0 : (v > 1 ? 1.0 : v);
  return v;
}

/// Unit-box coordinate of v in box b.
template <class T>
T to_hat(const T& v, const Interval& b) {
  return clamp01<T>((v - num<T>(b.lo)) / (num<T>(b.hi) - num<T>(b.lo)));
}

/// Grid cells (left endpoints k of [k 2^-L, (k+1) 2^-L]) containing a unit-box value.
template <class T>
std::vector<long> cells(const T& xh, int L) {
  const T scaled = xh * pow2<T>(L);
  const long n = 1L << L;
  long k = floor_int(scaled);
  std::vector<long> out;
  if (k >= n) return {n - 1};
  out.push_back(k);
  if (k >= 1 && is_integer(scaled)) out.insert(out.begin(), k - 1);
  return out;
}

/// z^x range of the tightened sawtooth block (or epigraph when `epi_only`) in original units.
template <class T>
ZRange<T> square_range(const Interval& b, const T& v, SawtoothDepths d, EnvelopeMode mode, bool epi_only) {
  const T lo = num<T>(b.lo), l = num<T>(b.hi) - lo;
  const T vh = clamp01<T>((v - lo) / l);
  const T shift = lo * (2 * v - lo);
  ZRange<T> r;
  const T low_hat = mode.limit ? T(vh * vh) : epi_lower(vh, d.L1);
  r.lo = l * l * low_hat + shift;
  if (epi_only) {
    r.hi = T(0);
    r.hi_infinite = true;
  } else {
    r.hi = l * l * pwl_square(vh, d.L) + shift;
  }
  return r;
}

template <class T>
void intersect(ZRange<T>& r, const ZRange<T>& o) {
  r.lo = tmax(r.lo, o.lo);
  if (o.hi_infinite) return;
  if (r.hi_infinite) {
    r.hi = o.hi;
    r.hi_infinite = false;
  } else {
    r.hi = tmin(r.hi, o.hi);
  }
}

template <class T>
void unite(ZRange<T>& acc, const ZRange<T>& o, bool first) {
  if (first) {
    acc = o;
    return;
  }
  acc.lo = tmin(acc.lo, o.lo);
  acc.hi = tmax(acc.hi, o.hi);
}

}  // namespace

template <class T>
ZRange<T> mccormick_range(const T& xl, const T& xu, const T& yl, const T& yu, const T& x, const T& y) {
  ZRange<T> r;
  r.lo = tmax<T>(T(xl * y + yl * x - xl * yl), T(xu * y + yu * x - xu * yu));
  r.hi = tmin<T>(T(xu * y + yl * x - xu * yl), T(xl * y + yu * x - xl * yu));
  return r;
}

template <class T>
ZRange<T> envelope_bilinear(const RelaxationConfig& cfg, Interval bx, Interval by, const T& x, const T& y,
                            EnvelopeMode mode) {
  cfg.validate();
  check_inside(x, bx);
  check_inside(y, by);
  const T xl = num<T>(bx.lo), xu = num<T>(bx.hi), yl = num<T>(by.lo), yu = num<T>(by.hi);
  const ZRange<T> mc = mccormick_range(xl, xu, yl, yu, x, y);
  const SawtoothDepths d = cfg.depths();
  const int L = cfg.L;
  switch (cfg.method) {
    case Method::McCormickOnly: return mc;
    case Method::Bin2:
    case Method::Bin3:
    case Method::HybS: {
      const ZRange<T> zx = square_range(bx, x, d, mode, false);
      const ZRange<T> zy = square_range(by, y, d, mode, false);
      const Interval bp{bx.lo + by.lo, bx.hi + by.hi}, bm{bx.lo - by.hi, bx.hi - by.lo};
      const T half(num<T>(0.5));
      ZRange<T> r;
      if (cfg.method == Method::Bin2) {
        const ZRange<T> zp = square_range(bp, T(x + y), d, mode, false);
        r.lo = half * (zp.lo - zx.hi - zy.hi);
        r.hi = half * (zp.hi - zx.lo - zy.lo);
      } else if (cfg.method == Method::Bin3) {
        const ZRange<T> zp = square_range(bm, T(x - y), d, mode, false);
        r.lo = half * (zx.lo + zy.lo - zp.hi);
        r.hi = half * (zx.hi + zy.hi - zp.lo);
      } else {
        const ZRange<T> z1 = square_range(bp, T(x + y), d, mode, true);
        const ZRange<T> z2 = square_range(bm, T(x - y), d, mode, true);
        r.lo = half * (z1.lo - zx.hi - zy.hi);
        r.hi = half * (zx.hi + zy.hi - z2.lo);
      }
      if (cfg.include_mccormick) intersect(r, mc);
      return r;
    }
    case Method::NMDT:
    case Method::TNMDT: {
      const bool disc_y = cfg.nmdt_side == 1 || (cfg.nmdt_side == -1 && by.width() > bx.width());
      const Interval bd = disc_y ? by : bx;
      const T& vd = disc_y ? y : x;
      const T dl = num<T>(bd.lo), ld = num<T>(bd.hi) - dl;
      const T h = pow2<T>(-L);
      ZRange<T> acc;
      bool first = true;
      for (long k : cells(to_hat(vd, bd), L)) {
        const T cl = dl + ld * T(k) * h, cu = dl + ld * T(k + 1) * h;
        const ZRange<T> r = disc_y ? mccormick_range(xl, xu, cl, cu, x, y) : mccormick_range(cl, cu, yl, yu, x, y);
        unite(acc, r, first);
        first = false;
      }
      return acc;
    }
    case Method::DNMDT:
    case Method::TDNMDT: {
      const T h = pow2<T>(-L);
      const T lx = xu - xl, ly = yu - yl;
      ZRange<T> acc;
      bool first = true;
      for (long kx : cells(to_hat(x, bx), L))
        for (long ky : cells(to_hat(y, by), L)) {
          const ZRange<T> r = mccormick_range(T(xl + lx * T(kx) * h), T(xl + lx * T(kx + 1) * h),
                                              T(yl + ly * T(ky) * h), T(yl + ly * T(ky + 1) * h), x, y);
          unite(acc, r, first);
          first = false;
        }
      return acc;
    }
  }
  throw std::logic_error("unhandled method");
}

template <class T>
ZRange<T> envelope_square(const RelaxationConfig& cfg, Interval bx, const T& x, EnvelopeMode mode) {
  cfg.validate();
  check_inside(x, bx);
  const SawtoothDepths d = cfg.depths();
  if (is_separable(cfg.method)) return square_range(bx, x, d, mode, false);
  const T lo = num<T>(bx.lo), hi = num<T>(bx.hi), l = hi - lo;
  if (cfg.method == Method::McCormickOnly) {
    ZRange<T> r;
    r.lo = tmax<T>(T(2 * lo * x - lo * lo), T(2 * hi * x - hi * hi));
    r.hi = (lo + hi) * x - lo * hi;
    return r;
  }
  const int L = cfg.L;
  const T h = pow2<T>(-L);
  const T xh = clamp01<T>((x - lo) / l);
  const bool dbl = cfg.method == Method::DNMDT || cfg.method == Method::TDNMDT;
  const bool tight = cfg.method == Method::TNMDT || cfg.method == Method::TDNMDT;
  const T epi = mode.limit ? T(xh * xh) : epi_lower(xh, d.L1);
  ZRange<T> acc;
  bool first = true;
  for (long k : cells(xh, L)) {
    const T c = T(k) * h;
    const T delta = xh - c;
    ZRange<T> r;
    if (dbl) {
      const T base = c * (xh + delta);
      r.hi = base + h * delta;
      r.lo = base + tmax<T>(T(0), T(2 * h * delta - h * h));
    } else {
      const T base = c * xh;
      r.hi = base + tmin<T>(T(h * xh), delta);
      r.lo = base + tmax<T>(T(0), T(h * xh + delta - h));
    }
    if (cfg.method == Method::TDNMDT)
      r.lo = epi;
    else if (tight)
      r.lo = tmax(r.lo, epi);
    unite(acc, r, first);
    first = false;
  }
  const T shift = lo * (2 * x - lo);
  acc.lo = l * l * acc.lo + shift;
  acc.hi = l * l * acc.hi + shift;
  return acc;
}

template ZRange<double> mccormick_range(const double&, const double&, const double&, const double&, const double&,
                                        const double&);
template ZRange<Rational> mccormick_range(const Rational&, const Rational&, const Rational&, const Rational&,
                                          const Rational&, const Rational&);
template ZRange<double> envelope_bilinear(const RelaxationConfig&, Interval, Interval, const double&, const double&,
                                          EnvelopeMode);
template ZRange<Rational> envelope_bilinear(const RelaxationConfig&, Interval, Interval, const Rational&,
                                            const Rational&, EnvelopeMode);
template ZRange<double> envelope_square(const RelaxationConfig&, Interval, const double&, EnvelopeMode);
template ZRange<Rational> envelope_square(const RelaxationConfig&, Interval, const Rational&, EnvelopeMode);

double envelope(Method method, double x, double y, const RelaxationConfig& cfg, EnvSide side, bool square) {
  RelaxationConfig c = cfg;
  c.method = method;
  const ZRange<double> r = square ? envelope_square<double>(c, {0, 1}, x) : envelope_bilinear<double>(c, {0, 1}, {0, 1}, x, y);
  if (side == EnvSide::Max && r.hi_infinite) return kInf;
  return side == EnvSide::Min ? r.lo : r.hi;
}

}  // namespace relax
