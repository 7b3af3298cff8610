#include "relax/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "parallel.hpp"

namespace relax {

namespace {

double p2(int e) { return std::ldexp(1.0, e); }

template <class F>
void for_each_index(long n, const Exec& exec, F body) {
  detail::for_each_index(n, exec.parallel, exec.jobs, body);
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Analytic catalog

ErrorBound analytic_max_error(Method method, int L, int L1) {
  if (L < 0) throw std::invalid_argument("L must be nonnegative");
  if (needs_L1(method) && L1 < L) throw std::invalid_argument("L1 < L: lower-bounding depth must be at least L");
  switch (method) {
    case Method::McCormickOnly: return {0.25, 0.25};
    case Method::Bin2:
    case Method::Bin3: return {p2(-2 * L - 2), p2(-2 * L - 1) + p2(-2 * L1 - 3)};
    case Method::HybS: return {p2(-2 * L - 2), p2(-2 * L - 2) + p2(-2 * L1 - 3)};
    case Method::NMDT:
    case Method::TNMDT: return {p2(-L - 2), p2(-L - 2)};
    case Method::DNMDT:
    case Method::TDNMDT: return {p2(-2 * L - 2), p2(-2 * L - 2)};
  }
  throw std::logic_error("unhandled method");
}

SquareErrorBound analytic_square_error(Method method, int L, int L1) {
  if (L < 0) throw std::invalid_argument("L must be nonnegative");
  if (needs_L1(method) && L1 < L) throw std::invalid_argument("L1 < L: lower-bounding depth must be at least L");
  const double h = p2(-L);
  const double nmdt_under = h * (1 + 2 * h) / (4 * (1 + h) * (1 + h));
  const double nmdt_over = L <= 1 ? p2(-2 * L - 2) : h / 4 - h * h * h / (4 * (1 - h) * (1 - h));
  switch (method) {
    case Method::McCormickOnly: return {0.25, 0.25};
    case Method::Bin2:
    case Method::Bin3:
    case Method::HybS: return {p2(-2 * L1 - 4), p2(-2 * L - 2)};
    case Method::NMDT: return {nmdt_under, nmdt_over};
    case Method::TNMDT: return {std::min(nmdt_under, p2(-2 * L1 - 4)), nmdt_over};
    case Method::DNMDT: return {p2(-2 * L - 2), p2(-2 * L - 2)};
    case Method::TDNMDT: return {p2(-2 * L1 - 4), p2(-2 * L - 2)};
  }
  throw std::logic_error("unhandled method");
}

Rational analytic_avg_error(Method method, int L) {
  if (L < 0) throw std::invalid_argument("L must be nonnegative");
  const Rational h = pow2<Rational>(-L);
  switch (method) {
    case Method::McCormickOnly: return Rational(1, 6);
    case Method::NMDT:
    case Method::TNMDT: return Rational(1, 6) * h;
    case Method::DNMDT:
    case Method::TDNMDT: return Rational(1, 6) * h * h;
    case Method::HybS: return Rational(1, 3) * h * h;
    case Method::Bin2:
    case Method::Bin3: return L == 0 ? Rational(7, 12) : Rational(1, 2) * h * h;
  }
  throw std::logic_error("unhandled method");
}

// ---------------------------------------------------------------------------------------------
// Limit LP envelopes and volumes

double c2_lower(double x, double y, double xl, double xu, double yl, double yu) {
  return 0.5 * ((x + y) * (x + y) - (xu + xl) * x + xu * xl - (yu + yl) * y + yu * yl);
}
double c2_upper(double x, double y, double xl, double xu, double yl, double yu) {
  return 0.5 * ((xl + xu + yl + yu) * (x + y) - (xl + yl) * (xu + yu) - x * x - y * y);
}
double c3_lower(double x, double y, double xl, double xu, double yl, double yu) {
  return 0.5 * (x * x + y * y - (xu + xl - yu - yl) * (x - y) + (xl - yu) * (xu - yl));
}
double c3_upper(double x, double y, double xl, double xu, double yl, double yu) {
  return 0.5 * ((xl + xu) * x - xl * xu + (yl + yu) * y - yl * yu - (x - y) * (x - y));
}

template <class T>
T lp_volume(Method method, const T& lx, const T& ly) {
  if (!(lx > 0) || !(ly > 0)) throw std::invalid_argument("lp_volume: side lengths must be positive");
  switch (method) {
    case Method::HybS: return (lx * ly * ly * ly + ly * lx * lx * lx) / 6;
    case Method::Bin2:
    case Method::Bin3: return lx * ly * (2 * lx * lx + 3 * lx * ly + 2 * ly * ly) / 12;
    default: throw std::invalid_argument("lp_volume: only HybS, Bin2 and Bin3 have closed forms");
  }
}
template double lp_volume(Method, const double&, const double&);
template Rational lp_volume(Method, const Rational&, const Rational&);

double integrate_band(double (*upper)(double, double, double, double, double, double),
                      double (*lower)(double, double, double, double, double, double), double xl, double xu,
                      double yl, double yu, int panels) {
  // 3-point Gauss-Legendre per panel and axis.
  static const std::array<double, 3> node{-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const std::array<double, 3> weight{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double hx = (xu - xl) / panels, hy = (yu - yl) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i)
    for (int j = 0; j < panels; ++j) {
      const double cx = xl + (i + 0.5) * hx, cy = yl + (j + 0.5) * hy;
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double x = cx + 0.5 * hx * node[a], y = cy + 0.5 * hy * node[b];
          s += weight[a] * weight[b] * (upper(x, y, xl, xu, yl, yu) - lower(x, y, xl, xu, yl, yu));
        }
      total += s * 0.25 * hx * hy;
    }
  return total;
}

// ---------------------------------------------------------------------------------------------
// Empirical estimators

namespace {

struct RowMax {
  double under = -kInf, over = -kInf;
  Point2 at_under, at_over;
};

ZRange<double> unit_envelope(const RelaxationConfig& cfg, bool square, double x, double y, EnvelopeMode mode) {
  return square ? envelope_square<double>(cfg, {0, 1}, x, mode)
                : envelope_bilinear<double>(cfg, {0, 1}, {0, 1}, x, y, mode);
}

}  // namespace

EmpiricalMax empirical_max_error(const RelaxationConfig& cfg, bool square, int n, Exec exec) {
  if (n < 2) throw std::invalid_argument("empirical_max_error: need at least 2 grid points per axis");
  cfg.validate();
  const int ny = square ? 1 : n;
  std::vector<RowMax> rows(n);
  for_each_index(n, exec, [&](long i) {
    RowMax r;
    const double x = static_cast<double>(i) / (n - 1);
    for (int j = 0; j < ny; ++j) {
      const double y = square ? x : static_cast<double>(j) / (n - 1);
      const ZRange<double> z = unit_envelope(cfg, square, x, y, {});
      const double f = x * y;
      const double under = f - z.lo;
      const double over = z.hi_infinite ? kInf : z.hi - f;
      if (under > r.under) r.under = under, r.at_under = {x, y};
      if (over > r.over) r.over = over, r.at_over = {x, y};
    }
    rows[i] = r;
  });
  EmpiricalMax out;
  out.max_under = out.max_over = -kInf;
  for (const RowMax& r : rows) {
    if (r.under > out.max_under) out.max_under = r.under, out.argmax_under = r.at_under;
    if (r.over > out.max_over) out.max_over = r.over, out.argmax_over = r.at_over;
  }
  out.max = std::max(out.max_under, out.max_over);
  out.argmax = out.max_under >= out.max_over ? out.argmax_under : out.argmax_over;
  out.points = static_cast<long>(n) * ny;
  return out;
}

EmpiricalAvg monte_carlo_avg_error(const RelaxationConfig& cfg, bool square, long samples, std::uint64_t seed,
                                   EnvelopeMode mode, Exec exec) {
  if (samples < 2) throw std::invalid_argument("monte_carlo_avg_error: need at least 2 samples");
  cfg.validate();
  if (unit_envelope(cfg, square, 0.5, 0.5, mode).hi_infinite)
    throw std::invalid_argument("monte_carlo_avg_error: unbounded band");
  constexpr long kBlock = 1 << 14;
  const long blocks = (samples + kBlock - 1) / kBlock;
  std::vector<double> sum(blocks), sum_sq(blocks);
  for_each_index(blocks, exec, [&](long b) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(sq);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const long count = std::min(kBlock, samples - b * kBlock);
    double s = 0.0, s2 = 0.0;
    for (long k = 0; k < count; ++k) {
      const double x = U(rng);
      const double y = square ? x : U(rng);
      const ZRange<double> z = unit_envelope(cfg, square, x, y, mode);
      const double w = z.hi - z.lo;
      s += w;
      s2 += w * w;
    }
    sum[b] = s;
    sum_sq[b] = s2;
  });
  double s = 0.0, s2 = 0.0;
  for (long b = 0; b < blocks; ++b) s += sum[b], s2 += sum_sq[b];
  EmpiricalAvg out;
  out.samples = samples;
  out.mean = s / samples;
  const double var = std::max(0.0, (s2 - samples * out.mean * out.mean) / (samples - 1));
  out.std_error = std::sqrt(var / samples);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Exact per-cell integration

namespace {

struct QPoint {
  Rational x, y;
};
using Polygon = std::vector<QPoint>;

/// Line a x + b y = c.
struct Line {
  Rational a, b, c;
};

Rational twice_area(const Polygon& p) {
  Rational s = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    const QPoint& u = p[i];
    const QPoint& v = p[(i + 1) % p.size()];
    s += u.x * v.y - v.x * u.y;
  }
  return s;
}

/// Splits a convex polygon by a line; pieces of zero area are dropped.
void split(const Polygon& poly, const Line& ln, std::vector<Polygon>& out) {
  std::vector<Rational> s(poly.size());
  bool pos = false, neg = false;
  for (size_t i = 0; i < poly.size(); ++i) {
    s[i] = ln.a * poly[i].x + ln.b * poly[i].y - ln.c;
    pos = pos || s[i] > 0;
    neg = neg || s[i] < 0;
  }
  if (!(pos && neg)) {
    out.push_back(poly);
    return;
  }
  Polygon P, N;
  for (size_t i = 0; i < poly.size(); ++i) {
    const size_t k = (i + 1) % poly.size();
    if (s[i] >= 0) P.push_back(poly[i]);
    if (s[i] <= 0) N.push_back(poly[i]);
    if ((s[i] > 0 && s[k] < 0) || (s[i] < 0 && s[k] > 0)) {
      const Rational t = s[i] / (s[i] - s[k]);
      const QPoint q{poly[i].x + t * (poly[k].x - poly[i].x), poly[i].y + t * (poly[k].y - poly[i].y)};
      P.push_back(q);
      N.push_back(q);
    }
  }
  if (P.size() >= 3 && twice_area(P) != 0) out.push_back(std::move(P));
  if (N.size() >= 3 && twice_area(N) != 0) out.push_back(std::move(N));
}

/// Lines across which the limit band of `cfg` on the unit box changes its polynomial piece.
std::vector<Line> break_lines(const RelaxationConfig& cfg) {
  std::vector<Line> lines;
  const long n = 1L << cfg.L;
  const Rational h = pow2<Rational>(-cfg.L);
  auto add = [&](long a, long b, const Rational& c) { lines.push_back({Rational(a), Rational(b), c}); };
  const bool grid_x = cfg.method != Method::McCormickOnly;
  const bool grid_y = is_separable(cfg.method) || cfg.method == Method::DNMDT || cfg.method == Method::TDNMDT;
  for (long k = 1; k < n; ++k) {
    if (grid_x) add(1, 0, Rational(k) * h);
    if (grid_y) add(0, 1, Rational(k) * h);
  }
  switch (cfg.method) {
    case Method::McCormickOnly:
      add(1, 1, Rational(1));
      add(1, -1, Rational(0));
      break;
    case Method::Bin2:
      for (long k = 1; k < n; ++k) add(1, 1, 2 * Rational(k) * h);
      break;
    case Method::Bin3:
      for (long k = 1; k < n; ++k) add(1, -1, 2 * Rational(k) * h - 1);
      break;
    case Method::HybS: break;
    case Method::NMDT:
    case Method::TNMDT:
      // Cell-wise McCormick switch lines x - h y = k h and x + h y = (k + 1) h.
      for (long k = 0; k < n; ++k) {
        lines.push_back({Rational(1), -h, Rational(k) * h});
        lines.push_back({Rational(1), h, Rational(k + 1) * h});
      }
      break;
    case Method::DNMDT:
    case Method::TDNMDT:
      for (long m = 1; m < 2 * n; ++m) add(1, 1, Rational(m) * h);
      for (long m = -n + 1; m < n; ++m) add(1, -1, Rational(m) * h);
      break;
  }
  return lines;
}

}  // namespace

std::vector<Rational> cell_volumes(const RelaxationConfig& cfg_in, int q, Exec exec) {
  RelaxationConfig cfg = cfg_in;
  cfg.include_mccormick = false;
  cfg.validate();
  if (q < 0 || q > 12) throw std::invalid_argument("cell_volumes: cell exponent out of range");
  if (cfg.method == Method::NMDT || cfg.method == Method::TNMDT) cfg.nmdt_side = 0;
  const long n = 1L << q;
  const Rational w = pow2<Rational>(-q);
  const std::vector<Line> lines = break_lines(cfg);
  const EnvelopeMode mode{true};
  auto band = [&](const Rational& x, const Rational& y) {
    const ZRange<Rational> z = envelope_bilinear<Rational>(cfg, {0, 1}, {0, 1}, x, y, mode);
    return Rational(z.hi - z.lo);
  };
  std::vector<Rational> vol(n * n);
  for_each_index(n * n, exec, [&](long idx) {
    const Rational x0 = Rational(idx / n) * w, y0 = Rational(idx % n) * w;
    std::vector<Polygon> pieces{{{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + w}, {x0, y0 + w}}};
    for (const Line& ln : lines) {
      std::vector<Polygon> next;
      for (const Polygon& p : pieces) split(p, ln, next);
      pieces.swap(next);
    }
    Rational total = 0;
    // Fan triangulation; the edge-midpoint rule integrates quadratics exactly on triangles.
    for (const Polygon& p : pieces)
      for (size_t k = 1; k + 1 < p.size(); ++k) {
        const QPoint &a = p[0], &b = p[k], &c = p[k + 1];
        Rational area = ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)) / 2;
        if (area < 0) area = -area;
        const Rational fm = band((a.x + b.x) / 2, (a.y + b.y) / 2) + band((b.x + c.x) / 2, (b.y + c.y) / 2) +
                            band((c.x + a.x) / 2, (c.y + a.y) / 2);
        total += area * fm / 3;
      }
    vol[idx] = total;
  });
  return vol;
}

Rational exact_avg_error(const RelaxationConfig& cfg, Exec exec) {
  Rational s = 0;
  for (const Rational& v : cell_volumes(cfg, std::max(cfg.L, 0), exec)) s += v;
  return s;
}

ErrorReport error_report(const RelaxationConfig& cfg, int grid_points, long samples, std::uint64_t seed, Exec exec) {
  cfg.validate();
  ErrorReport r;
  r.method = cfg.method;
  r.L = cfg.L;
  r.L1 = cfg.l1();
  r.analytic_max = analytic_max_error(cfg.method, cfg.L, cfg.l1());
  r.analytic_avg = to_double(analytic_avg_error(cfg.method, cfg.L));
  const EmpiricalMax em = empirical_max_error(cfg, false, grid_points, exec);
  r.empirical_max = em.max;
  r.maximizer = em.argmax;
  RelaxationConfig limit = cfg;
  limit.include_mccormick = false;
  const EmpiricalAvg ea = monte_carlo_avg_error(limit, false, samples, seed, {true}, exec);
  r.empirical_avg = ea.mean;
  r.empirical_avg_se = ea.std_error;
  return r;
}

// ---------------------------------------------------------------------------------------------
// Breakpoint placement

BreakpointFamily parse_breakpoint_family(const std::string& s) {
  if (s == "separable-cubic") return BreakpointFamily::SeparableCubic;
  if (s == "mccormick-quadratic") return BreakpointFamily::McCormickQuadratic;
  throw std::invalid_argument("unknown breakpoint family '" + s + "'");
}

namespace {

template <class T>
void check_lengths(const std::vector<T>& l, const char* what) {
  if (l.empty()) throw std::invalid_argument(std::string("breakpoint_objective: empty ") + what);
  T s = 0;
  for (const T& v : l) {
    if (v < 0) throw std::invalid_argument(std::string("breakpoint_objective: negative length in ") + what);
    s += v;
  }
  if constexpr (std::is_same_v<T, Rational>) {
    if (s != 1) throw std::invalid_argument(std::string("breakpoint_objective: lengths do not sum to 1 in ") + what);
  } else {
    if (std::abs(s - 1) > 1e-12)
      throw std::invalid_argument(std::string("breakpoint_objective: lengths do not sum to 1 in ") + what);
  }
}

}  // namespace

template <class T>
T breakpoint_objective(BreakpointFamily family, const std::vector<T>& lx, const std::vector<T>& ly) {
  check_lengths(lx, "lengths_x");
  check_lengths(ly, "lengths_y");
  if (family == BreakpointFamily::McCormickQuadratic) {
    T sx = 0, sy = 0;
    for (const T& v : lx) sx += v * v;
    for (const T& v : ly) sy += v * v;
    return sx * sy / 6;
  }
  T s = 0;
  for (const T& a : lx)
    for (const T& b : ly) s += a * b * b * b + b * a * a * a;
  return s / 6;
}
template double breakpoint_objective(BreakpointFamily, const std::vector<double>&, const std::vector<double>&);
template Rational breakpoint_objective(BreakpointFamily, const std::vector<Rational>&, const std::vector<Rational>&);

}  // namespace relax
