// Analytic error catalog, limit LP volumes, empirical estimators and breakpoint placement.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "relax/analysis.hpp"

using namespace relax;

namespace {

RelaxationConfig config(Method m, int L, int L1 = -1, bool mccormick = true) {
  RelaxationConfig c;
  c.method = m;
  c.L = L;
  c.L1 = L1;
  c.include_mccormick = mccormick;
  return c;
}

const std::vector<Method> kFive{Method::Bin2, Method::Bin3, Method::HybS, Method::NMDT, Method::DNMDT};

double p2(int e) { return std::ldexp(1.0, e); }

/// Random point of the probability simplex of dimension n.
std::vector<double> simplex_point(std::mt19937_64& rng, int n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double s = 0;
  for (auto& x : v) s += (x = e(rng));
  for (auto& x : v) x /= s;
  double t = 0;
  for (int k = 0; k + 1 < n; ++k) t += v[k];
  v[n - 1] = 1.0 - t;
  return v;
}

}  // namespace

TEST_CASE("analytic maximum errors") {
  CHECK(analytic_max_error(Method::DNMDT, 3, 3).upper == p2(-8));
  CHECK(analytic_max_error(Method::DNMDT, 3, 3).exact());
  CHECK(analytic_max_error(Method::NMDT, 3, 3).upper == p2(-5));
  const ErrorBound h = analytic_max_error(Method::HybS, 2, 4);
  CHECK(h.lower == p2(-6));
  CHECK(h.upper == p2(-6) + p2(-11));
  const ErrorBound b = analytic_max_error(Method::Bin2, 2, 4);
  CHECK(b.lower == p2(-6));
  CHECK(b.upper == p2(-5) + p2(-11));
  CHECK(analytic_max_error(Method::Bin3, 2, 4).upper == b.upper);
}

TEST_CASE("analytic average errors") {
  CHECK(analytic_avg_error(Method::HybS, 2) == Rational(1, 48));
  CHECK(analytic_avg_error(Method::Bin2, 0) == Rational(7, 12));
  CHECK(analytic_avg_error(Method::NMDT, 4) == Rational(1, 96));
  CHECK(analytic_avg_error(Method::DNMDT, 1) == Rational(1, 24));
  CHECK(analytic_avg_error(Method::Bin3, 2) == Rational(1, 32));
}

TEST_CASE("limit LP volumes") {
  CHECK(lp_volume<Rational>(Method::HybS, 1, 1) == Rational(1, 3));
  CHECK(lp_volume<Rational>(Method::Bin2, 1, 1) == Rational(7, 12));
  CHECK(lp_volume<Rational>(Method::Bin3, 1, 1) == Rational(7, 12));
  CHECK(lp_volume_gap<Rational>(1, 1) == Rational(1, 4));
  const Rational lx(3, 2), ly(1, 2);
  CHECK(lp_volume<Rational>(Method::Bin2, lx, ly) - lp_volume<Rational>(Method::HybS, lx, ly) == lp_volume_gap(lx, ly));
  CHECK_THROWS_AS(lp_volume<double>(Method::NMDT, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(lp_volume<double>(Method::HybS, 0, 1), std::invalid_argument);
  SUBCASE("closed forms match numerical integration of the limit envelopes") {
    for (const auto& box : std::vector<std::array<double, 4>>{{0, 1, 0, 1}, {-1, 2, 0.5, 1}, {-2, -1, -3, 1}}) {
      const double lx = box[1] - box[0], ly = box[3] - box[2];
      CHECK(integrate_band(c2_upper, c2_lower, box[0], box[1], box[2], box[3]) ==
            doctest::Approx(lp_volume<double>(Method::Bin2, lx, ly)).epsilon(1e-10));
      CHECK(integrate_band(c3_upper, c3_lower, box[0], box[1], box[2], box[3]) ==
            doctest::Approx(lp_volume<double>(Method::Bin3, lx, ly)).epsilon(1e-10));
    }
  }
  SUBCASE("limit envelopes are valid") {
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) {
        const double x = -1 + 3 * i / 20.0, y = 0.5 + 0.5 * j / 20.0;
        CHECK(c2_lower(x, y, -1, 2, 0.5, 1) <= x * y + 1e-12);
        CHECK(c3_lower(x, y, -1, 2, 0.5, 1) <= x * y + 1e-12);
        CHECK(c2_upper(x, y, -1, 2, 0.5, 1) >= x * y - 1e-12);
        CHECK(c3_upper(x, y, -1, 2, 0.5, 1) >= x * y - 1e-12);
      }
  }
}

TEST_CASE("empirical maxima examples") {
  SUBCASE("D-NMDT at L = 1 peaks at the cell midpoints") {
    const EmpiricalMax e = empirical_max_error(config(Method::DNMDT, 1), false, 257);
    CHECK(e.max == doctest::Approx(p2(-4)).epsilon(1e-12));
    CHECK(std::fmod(e.argmax.x * 4, 2.0) == doctest::Approx(1.0));
    CHECK(std::fmod(e.argmax.y * 4, 2.0) == doctest::Approx(1.0));
  }
  SUBCASE("univariate sawtooth relaxation at L = L1 = 2") {
    const EmpiricalMax e = empirical_max_error(config(Method::HybS, 2, 2), true, 1025);
    CHECK(e.max_under == doctest::Approx(p2(-8)).epsilon(1e-12));
    CHECK(e.max_over == doctest::Approx(p2(-6)).epsilon(1e-12));
  }
  SUBCASE("univariate NMDT at L = 1: lower error 1/9 at x = 1/3 and 2/3") {
    // Value from the closed form; the maximizers are the two points x = 1/3, 2/3.
    const EmpiricalMax e = empirical_max_error(config(Method::NMDT, 1), true, 3 * 512 + 1);
    CHECK(e.max_under == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    const double x = e.argmax_under.x;
    CHECK((std::abs(x - 1.0 / 3.0) < 1e-12 || std::abs(x - 2.0 / 3.0) < 1e-12));
  }
}

TEST_CASE("empirical maxima never exceed the analytic bound") {
  for (Method m : kFive)
    for (int L = 1; L <= 3; ++L)
      for (int L1 = L; L1 <= L + 1; ++L1) {
        const EmpiricalMax e = empirical_max_error(config(m, L, L1), false, 257);
        const ErrorBound b = analytic_max_error(m, L, L1);
        CHECK(e.max <= b.upper + 1e-12);
        if (m == Method::NMDT || m == Method::DNMDT) CHECK(e.max == doctest::Approx(b.upper).epsilon(1e-12));
      }
}

TEST_CASE("exact cell volumes reproduce the average errors") {
  for (Method m : kFive)
    for (int L = 1; L <= 3; ++L) CHECK(exact_avg_error(config(m, L)) == analytic_avg_error(m, L));
}

TEST_CASE("per-cell constancy of the band volume") {
  const auto constant = [](const std::vector<Rational>& v) {
    for (const auto& c : v)
      if (c != v.front()) return false;
    return true;
  };
  for (int L = 1; L <= 3; ++L) {
    for (Method m : {Method::HybS, Method::DNMDT}) CHECK(constant(cell_volumes(config(m, L), L)));
    // NMDT discretizes x only: its pieces are full-height strips of width 2^{-L}.
    const auto cells = cell_volumes(config(Method::NMDT, L), L);
    const size_t side = size_t{1} << L;
    std::vector<Rational> strips(side);
    for (size_t k = 0; k < cells.size(); ++k) strips[k / side] += cells[k];
    CHECK(constant(strips));
    if (L >= 2) CHECK_FALSE(constant(cells));
    // Separable Bin2 / Bin3 bands repeat with period 2^{-(L-1)}, not 2^{-L}.
    for (Method m : {Method::Bin2, Method::Bin3}) {
      CHECK(constant(cell_volumes(config(m, L), L - 1)));
      CHECK_FALSE(constant(cell_volumes(config(m, L), L)));
    }
  }
}

TEST_CASE("Monte-Carlo average is within three standard errors") {
  for (Method m : kFive)
    for (int L = 1; L <= 2; ++L) {
      const EmpiricalAvg a = monte_carlo_avg_error(config(m, L, -1, false), false, 100000, 42);
      CHECK(std::abs(a.mean - analytic_avg_error(m, L).get_d()) <= 3 * a.std_error);
    }
}

TEST_CASE("serial and parallel sweeps agree bit for bit") {
  const RelaxationConfig cfg = config(Method::HybS, 2);
  const EmpiricalMax s = empirical_max_error(cfg, false, 129, {false, 0});
  const EmpiricalMax p = empirical_max_error(cfg, false, 129, {true, 4});
  CHECK(s.max == p.max);
  CHECK(s.argmax.x == p.argmax.x);
  CHECK(s.argmax.y == p.argmax.y);
  const EmpiricalAvg a = monte_carlo_avg_error(cfg, false, 50000, 3, {true}, {false, 0});
  const EmpiricalAvg b = monte_carlo_avg_error(cfg, false, 50000, 3, {true}, {true, 3});
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(cell_volumes(cfg, 2, {false, 0}) == cell_volumes(cfg, 2, {true, 2}));
}

TEST_CASE("error report") {
  const ErrorReport r = error_report(config(Method::DNMDT, 2), 129, 20000, 1);
  CHECK(r.analytic_max.upper == p2(-6));
  CHECK(r.empirical_max <= r.analytic_max.upper + 1e-12);
  CHECK(r.analytic_avg == doctest::Approx(1.0 / 96.0));
}

TEST_CASE("breakpoint objective") {
  using F = BreakpointFamily;
  const std::vector<double> u2{0.5, 0.5}, p{0.4, 0.6};
  CHECK(breakpoint_objective<double>(F::SeparableCubic, u2, u2) == doctest::Approx(1.0 / 12.0));
  for (int n = 1; n <= 5; ++n) {
    const std::vector<Rational> u(n, Rational(1, n));
    CHECK(breakpoint_objective<Rational>(F::McCormickQuadratic, u, u) == Rational(1, 6 * n * n));
  }
  CHECK(breakpoint_objective<double>(F::SeparableCubic, p, u2) > breakpoint_objective<double>(F::SeparableCubic, u2, u2));
  CHECK(breakpoint_objective<double>(F::McCormickQuadratic, p, p) >
        breakpoint_objective<double>(F::McCormickQuadratic, u2, u2));
  CHECK_THROWS_AS(breakpoint_objective<double>(F::SeparableCubic, {0.5, 0.6}, u2), std::invalid_argument);
  CHECK_THROWS_AS(breakpoint_objective<double>(F::SeparableCubic, {1.5, -0.5}, u2), std::invalid_argument);
  CHECK(parse_breakpoint_family("separable-cubic") == F::SeparableCubic);
  CHECK(parse_breakpoint_family("mccormick-quadratic") == F::McCormickQuadratic);
}

TEST_CASE("uniform breakpoints minimize both objectives") {
  using F = BreakpointFamily;
  std::mt19937_64 rng(8);
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng() % 8), m = 1 + static_cast<int>(rng() % 8);
    const auto lx = simplex_point(rng, n), ly = simplex_point(rng, m);
    const std::vector<double> ux(n, 1.0 / n), uy(m, 1.0 / m);
    for (F f : {F::SeparableCubic, F::McCormickQuadratic}) {
      const double r = breakpoint_objective(f, lx, ly), u = breakpoint_objective(f, ux, uy);
      if (n == 1 && m == 1)
        CHECK(r == doctest::Approx(u));
      else
        CHECK(r > u);
    }
  }
}
