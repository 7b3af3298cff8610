// Sawtooth functions, epigraph envelope, the S / T / tightened sawtooth emitters and witnesses.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "relax/sawtooth.hpp"
#include "relax/solver.hpp"
#include "relax/verify.hpp"

using namespace relax;

namespace {

Rational q(long p, long d) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

struct TsrModel {
  MilpModel m;
  TsrHandle h;
};

TsrModel tsr_model(Interval box, SawtoothDepths d) {
  TsrModel t;
  const VarId x = t.m.add_var("x", box.lo, box.hi);
  const VarId z = t.m.add_var("z", -kInf, kInf);
  t.h = emit_tightened_sawtooth(t.m, x, z, d);
  return t;
}

/// min / max of a variable with x fixed.
std::pair<Rational, Rational> range_at(const MilpModel& m, VarId x, double xv, VarId z) {
  MilpModel c = m;
  c.vars[x].lb = c.vars[x].ub = xv;
  const SolveResult lo = optimize_var(c, z, Direction::Minimize), hi = optimize_var(c, z, Direction::Maximize);
  REQUIRE(lo.status == SolveStatus::Optimal);
  REQUIRE(hi.status == SolveStatus::Optimal);
  return {*lo.exact_objective, *hi.exact_objective};
}

}  // namespace

TEST_CASE("tooth map") {
  CHECK(tooth(Rational(1, 2), 1) == 1);
  CHECK(tooth(Rational(1, 4), 2) == 1);
  CHECK(tooth(q(3, 10), 3) == q(2, 5));
  CHECK(tooth(q(3, 10), 0) == q(3, 10));
  CHECK_THROWS_AS(tooth(Rational(2), 1), std::domain_error);
  CHECK_THROWS_AS(tooth(Rational(-1, 4), 1), std::domain_error);
}

TEST_CASE("pwl_square") {
  CHECK(pwl_square(Rational(1, 4), 2) == q(1, 16));
  CHECK(pwl_square(Rational(1, 2), 1) == q(1, 4));
  CHECK(pwl_square(Rational(1, 4), 1) == q(1, 8));
  CHECK(pwl_square(Rational(1, 4), 1) - Rational(1, 16) == pow2<Rational>(-4));
}

TEST_CASE("interpolation, error bound and maximizers of F^L") {
  for (int L = 0; L <= 5; ++L) {
    const long n = 1L << L;
    for (long i = 0; i <= n; ++i) {
      const Rational x = q(i, n);
      CHECK(pwl_square(x, L) == x * x);
    }
    const long N = 1L << 9;
    for (long k = 0; k <= N; ++k) {
      const Rational x = q(k, N);
      const Rational e = pwl_square(x, L) - x * x;
      CHECK(e >= 0);
      CHECK(e <= pow2<Rational>(-2 * L - 2));
      CHECK(pwl_square(x, L + 1) <= pwl_square(x, L));
    }
    for (long i = 0; i < n; ++i) {
      const Rational mid = q(2 * i + 1, 2 * n);
      CHECK(pwl_square(mid, L) - mid * mid == pow2<Rational>(-2 * L - 2));
    }
  }
}

TEST_CASE("F^L is convex on a dyadic grid") {
  for (int L = 0; L <= 4; ++L) {
    const long N = 64;
    for (long k = 1; k < N; ++k) {
      const Rational a = pwl_square(q(k - 1, N), L), b = pwl_square(q(k, N), L), c = pwl_square(q(k + 1, N), L);
      CHECK(a + c >= 2 * b);
    }
  }
}

TEST_CASE("epi_lower") {
  CHECK(epi_lower(Rational(1, 2), 0) == q(1, 4));
  for (int L1 = 0; L1 <= 4; ++L1) CHECK(epi_lower(Rational(0), L1) == 0);
  CHECK(epi_lower(q(3, 8), 1) == q(1, 8));
  CHECK(q(9, 64) - epi_lower(q(3, 8), 1) == pow2<Rational>(-6));
  for (int L1 = 0; L1 <= 4; ++L1) {
    const long N = 1L << 9;
    for (long k = 0; k <= N; ++k) {
      const Rational x = q(k, N), y = 1 - x;
      const Rational e = x * x - epi_lower(x, L1);
      CHECK(e >= 0);
      CHECK(e <= pow2<Rational>(-2 * L1 - 4));
      CHECK(e == y * y - epi_lower(y, L1));  // reflection symmetry
    }
  }
}

TEST_CASE("emit_S and emit_T row counts") {
  MilpModel m;
  const VarId xh = m.add_var("xh", 0, 1);
  const SBlock s = emit_S(m, xh, 2, "s");
  CHECK(s.g.size() == 3);
  CHECK(s.alpha.size() == 2);
  CHECK(m.n_binaries() == 2);
  int eq = 0, ineq = 0;
  for (const Row& r : m.rows) (r.sense == Sense::Eq ? eq : ineq)++;
  CHECK(eq == 1);
  CHECK(ineq == 8);

  MilpModel t;
  const VarId th = t.add_var("xh", 0, 1);
  const auto g = emit_T(t, th, 3, "t");
  CHECK(g.size() == 4);
  eq = ineq = 0;
  for (const Row& r : t.rows) (r.sense == Sense::Eq ? eq : ineq)++;
  CHECK(eq == 1);
  CHECK(ineq == 6);
  CHECK(t.n_binaries() == 0);

  MilpModel z = t;
  z.vars[th].lb = z.vars[th].ub = 0.5;
  CHECK(*optimize_var(z, g[1], Direction::Maximize).exact_objective == 1);
  z.vars[th].lb = z.vars[th].ub = 0.0;
  for (VarId v : g) CHECK(*optimize_var(z, v, Direction::Maximize).exact_objective == 0);

  MilpModel e;
  CHECK(emit_S(e, e.add_var("xh", 0, 1), 0, "e").alpha.empty());
}

TEST_CASE("S rows enforce g_j = G(g_{j-1}) for every binary pattern") {
  MilpModel m;
  const VarId xh = m.add_var("xh", 0.125, 0.125);
  const SBlock s = emit_S(m, xh, 2, "s");
  int feasible = 0;
  for (int a1 = 0; a1 <= 1; ++a1)
    for (int a2 = 0; a2 <= 1; ++a2) {
      const std::map<VarId, int> fix{{s.alpha[0], a1}, {s.alpha[1], a2}};
      const SolveResult r = optimize_var(m, s.g[2], Direction::Maximize, fix);
      if (r.status != SolveStatus::Optimal) continue;
      ++feasible;
      const SolveResult lo = optimize_var(m, s.g[2], Direction::Minimize, fix);
      CHECK(*lo.exact_objective == *r.exact_objective);
      CHECK(r.exact_values[s.g[1]] == tooth(Rational(1, 8), 1));
      CHECK(r.exact_values[s.g[2]] == tooth(Rational(1, 8), 2));
    }
  CHECK(feasible == 1);
}

TEST_CASE("tightened sawtooth") {
  SUBCASE("z-range at x = 1/4 on the unit box, L = L1 = 1") {
    const TsrModel t = tsr_model({0, 1}, {1, 1});
    const auto [lo, hi] = range_at(t.m, t.h.x, 0.25, t.h.z);
    CHECK(lo == epi_lower(Rational(1, 4), 1));
    CHECK(lo == q(1, 16));  // the F^1 cut is the tangent at 1/4
    CHECK(hi == pwl_square(Rational(1, 4), 1));
    CHECK(hi == q(1, 8));
  }
  SUBCASE("MIP z-range matches the envelope functions on a dyadic grid") {
    for (SawtoothDepths d : {SawtoothDepths{1, 2}, SawtoothDepths{2, 3}}) {
      const TsrModel t = tsr_model({0, 1}, d);
      for (long k = 0; k <= 16; ++k) {
        const Rational x = q(k, 16);
        const auto [lo, hi] = range_at(t.m, t.h.x, x.get_d(), t.h.z);
        CHECK(lo == epi_lower(x, d.L1));
        CHECK(hi == pwl_square(x, d.L));
      }
    }
  }
  SUBCASE("interval transform on [-1, 1]") {
    const TsrModel t = tsr_model({-1, 1}, {2, 2});
    MilpModel c = t.m;
    c.vars[t.h.x].lb = c.vars[t.h.x].ub = 0.0;
    const SolveResult r = optimize_var(c, t.h.xhat, Direction::Maximize);
    CHECK(*r.exact_objective == q(1, 2));
    const auto [lo, hi] = range_at(t.m, t.h.x, 0.5, t.h.z);
    CHECK(lo <= q(1, 4));
    CHECK(hi >= q(1, 4));
    CHECK(hi - lo <= 4 * (pow2<Rational>(-6) + pow2<Rational>(-8)));
  }
  SUBCASE("variable and row counts") {
    for (SawtoothDepths d : {SawtoothDepths{1, 1}, SawtoothDepths{2, 3}, SawtoothDepths{3, 5}}) {
      const TsrModel t = tsr_model({0, 1}, d);
      CHECK(t.m.n_binaries() == d.L);
      CHECK(static_cast<int>(t.h.g.size()) == d.L1 + 1);
      // interval transforms 2; S: 1 + 4L; T levels above L: 2 (L1 - L); upper 1; cuts L1 + 1 + 2
      CHECK(t.m.n_rows() == 2 + (1 + 4 * d.L) + 2 * (d.L1 - d.L) + 1 + (d.L1 + 3));
    }
  }
  SUBCASE("errors") {
    MilpModel m;
    const VarId x = m.add_var("x", 0, 0), z = m.add_var("z", -kInf, kInf), y = m.add_var("y", 0, kInf);
    CHECK_THROWS_WITH_AS(emit_tightened_sawtooth(m, x, z, {1, 1}), doctest::Contains("zero-width"),
                         std::invalid_argument);
    CHECK_THROWS_AS(emit_tightened_sawtooth(m, y, z, {1, 1}), std::invalid_argument);
    CHECK_THROWS_WITH_AS(check_depths({2, 1}), doctest::Contains("L1 < L"), std::invalid_argument);
  }
}

TEST_CASE("sawtooth epigraph relaxation") {
  MilpModel m;
  const VarId p = m.add_var("p", 0, 1), zp = m.add_var("zp", -kInf, kInf);
  emit_sawtooth_epigraph(m, p, zp, 0);
  CHECK(m.n_binaries() == 0);
  for (long k = 0; k <= 8; ++k) {
    const Rational x = q(k, 8);
    MilpModel c = m;
    c.vars[p].lb = c.vars[p].ub = x.get_d();
    CHECK(optimize_var(c, zp, Direction::Maximize).status == SolveStatus::Unbounded);
    const Rational lo = *optimize_var(c, zp, Direction::Minimize).exact_objective;
    CHECK(lo == tmax(tmax(Rational(0), Rational(2 * x - 1)), Rational(x - Rational(1, 4))));
  }
  MilpModel m2;
  const VarId p2 = m2.add_var("p", -1, 1), z2 = m2.add_var("zp", -kInf, kInf);
  emit_sawtooth_epigraph(m2, p2, z2, 3);
  CHECK(m2.n_binaries() == 0);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(-1024, 1024);
  for (int t = 0; t < 100; ++t) {
    const Rational x = q(u(rng), 1024);
    MilpModel c = m2;
    c.vars[p2].lb = c.vars[p2].ub = x.get_d();
    c.vars[z2].lb = c.vars[z2].ub = Rational(x * x).get_d();
    CHECK(solve_builtin(c).status == SolveStatus::Optimal);
  }
}

TEST_CASE("sawtooth witness") {
  SUBCASE("examples") {
    const SawtoothWitness w = sawtooth_witness(q(3, 8), {2, 2});
    CHECK(w.g == std::vector<Rational>{q(3, 8), q(3, 4), q(1, 2)});
    CHECK(w.alpha == std::vector<int>{0, 1});
    const SawtoothWitness z = sawtooth_witness(Rational(0), {2, 3});
    for (const auto& g : z.g) CHECK(g == 0);
    CHECK(z.alpha == std::vector<int>{0, 0});
    CHECK(z.zmin == 0);
    CHECK(z.zmax == 0);
    const SawtoothWitness h = sawtooth_witness(q(1, 2), {1, 1});
    CHECK(h.g[1] == 1);
    CHECK(h.alpha[0] == 0);
  }
  SUBCASE("the tie at 1/2 admits both alpha values") {
    const TsrModel t = tsr_model({0, 1}, {1, 1});
    MilpModel c = t.m;
    c.vars[t.h.x].lb = c.vars[t.h.x].ub = 0.5;
    for (int a = 0; a <= 1; ++a) CHECK(solve_builtin(c, {{t.h.alpha[0], a}}).status == SolveStatus::Optimal);
  }
  SUBCASE("witnesses satisfy every emitted row exactly") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
      const int L = static_cast<int>(rng() % 4), L1 = L + static_cast<int>(rng() % 3);
      const bool unit = trial % 2 == 0;
      const Interval box = unit ? Interval{0, 1} : Interval{-2, 3};
      const TsrModel t = tsr_model(box, {L, L1});
      const Rational x = to_rational(box.lo) + q(static_cast<long>(rng() % 4097), 4096) * to_rational(box.width());
      const SawtoothWitness w = sawtooth_witness(x, box, {L, L1});
      std::vector<Rational> v(t.m.n_vars(), Rational(0));
      v[t.h.x] = x;
      v[t.h.xhat] = w.g[0];
      v[t.h.zhat] = w.g[0] * w.g[0];
      v[t.h.z] = x * x;
      for (size_t j = 0; j < t.h.g.size(); ++j) v[t.h.g[j]] = w.g[j];
      for (size_t j = 0; j < t.h.alpha.size(); ++j) v[t.h.alpha[j]] = w.alpha[j];
      REQUIRE(check_membership(t.m, v, true).member);
      CHECK(w.zmin <= w.g[0] * w.g[0]);
      CHECK(w.g[0] * w.g[0] <= w.zmax);
    }
  }
}
