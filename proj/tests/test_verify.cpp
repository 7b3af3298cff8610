// Verification harness: projected bounds, greedy LP minimizer, MIP x-sets, gap hulls,
// sharpness, hereditary sharpness, non-sharpness witnesses and membership.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "json.hpp"

#include "relax/verify.hpp"

using namespace relax;

namespace {

Rational q(long a, long b) { return frac(a, b); }

RelaxationConfig config(Method m, int L, int L1 = -1) {
  RelaxationConfig c;
  c.method = m;
  c.L = L;
  c.L1 = L1;
  return c;
}

Fixing fixing(std::map<int, int> v) { return Fixing{std::move(v)}; }

/// Tightened sawtooth relaxation of z = x^2 on [0,1] as a standalone model.
struct Tsr {
  MilpModel model;
  TsrHandle h;
};
Tsr make_tsr(SawtoothDepths d) {
  Tsr t;
  const VarId x = t.model.add_var("x", 0, 1), z = t.model.add_var("z", -kInf, kInf);
  t.h = emit_tightened_sawtooth(t.model, x, z, d, "x");
  return t;
}

}  // namespace

TEST_CASE("fixings") {
  CHECK(all_fixings(2).size() == 9);
  CHECK(all_fixings(2)[0].values.empty());
  CHECK(fixing({{2, 0}}).label(2) == "*0");
  CHECK_THROWS_AS(fixing({{3, 0}}).validate(2), std::invalid_argument);
  CHECK_THROWS_AS(fixing({{1, 2}}).validate(2), std::invalid_argument);
}

TEST_CASE("projected bounds recursion") {
  SUBCASE("no fixing keeps every level on [0,1]") {
    const BoundsVector b = bounds_recursion(Fixing{}, 2);
    for (int i = 0; i <= 2; ++i) {
      CHECK(b.a[i] == 0);
      CHECK(b.b[i] == 1);
    }
  }
  SUBCASE("alpha_2 = 0") {
    const BoundsVector b = bounds_recursion(fixing({{2, 0}}), 2);
    CHECK(b.a[2] == 0);
    CHECK(b.b[2] == 1);
    CHECK(b.a[1] == 0);
    CHECK(b.b[1] == q(1, 2));
    CHECK(b.a[0] == 0);
    CHECK(b.b[0] == 1);
  }
  SUBCASE("alpha = (1, 0)") {
    const BoundsVector b = bounds_recursion(fixing({{1, 1}, {2, 0}}), 2);
    CHECK(b.a[1] == 0);
    CHECK(b.b[1] == q(1, 2));
    CHECK(b.a[0] == q(3, 4));
    CHECK(b.b[0] == 1);
  }
}

TEST_CASE("greedy minimizer of the restricted LP") {
  SUBCASE("x = 0.3 without fixings") {
    const GreedyResult r = greedy_min_g(q(3, 10), Fixing{}, {2, 2});
    REQUIRE(r.g.size() == 3);
    CHECK(r.g[0] == q(3, 10));
    CHECK(r.g[1] == q(6, 10));
    CHECK(r.g[2] == q(8, 10));
  }
  SUBCASE("x = 0 gives g = 0 and z = 0") {
    const GreedyResult r = greedy_min_g(Rational(0), fixing({{2, 0}}), {2, 3});
    for (const auto& g : r.g) CHECK(g == 0);
    CHECK(r.zmin == 0);
  }
  SUBCASE("x outside the projected bounds") {
    CHECK_THROWS_AS(greedy_min_g(q(1, 4), fixing({{1, 1}}), {2, 2}), std::domain_error);
  }
  SUBCASE("agrees with the exact LP on random draws") {
    std::mt19937_64 rng(4);
    int compared = 0;
    for (int t = 0; t < 200; ++t) {
      const int L = 1 + static_cast<int>(rng() % 3);
      const Tsr tsr = make_tsr({L, L});
      Fixing f;
      std::map<VarId, int> fx;
      for (int i = 1; i <= L; ++i) {
        const int c = static_cast<int>(rng() % 3);
        if (c == 2) continue;
        f.values[i] = c;
        fx[tsr.h.alpha[i - 1]] = c;
      }
      const Rational x = frac(static_cast<long>(rng() % 65), 64);
      const HullRange lp = lp_range(tsr.model, {{tsr.h.x, x}}, tsr.h.z, fx);
      const BoundsVector b = bounds_recursion(f, L);
      if (x < b.a[0] || x > b.b[0]) {
        CHECK_FALSE(lp.feasible);
        CHECK_THROWS_AS(greedy_min_g(x, f, {L, L}), std::domain_error);
        continue;
      }
      REQUIRE(lp.feasible);
      CHECK(greedy_min_g(x, f, {L, L}).zmin == lp.lo);
      ++compared;
    }
    CHECK(compared > 100);
  }
}

TEST_CASE("MIP x-sets") {
  CHECK(mip_x_set(fixing({{2, 0}}), 2).str() == IntervalUnion{{{0, q(1, 4)}, {q(3, 4), 1}}}.str());
  CHECK(mip_x_set(Fixing{}, 2).str() == IntervalUnion{{{0, 1}}}.str());
  const IntervalUnion a1 = mip_x_set(fixing({{1, 1}}), 2);
  CHECK(a1.lo() == q(1, 2));
  CHECK(a1.hi() == 1);
  CHECK(a1.parts.size() == 1);
  const auto bd = mip_x_set(fixing({{2, 0}}), 2).boundary();
  CHECK(bd == std::vector<Rational>{0, q(2, 8), q(6, 8), 1});
}

TEST_CASE("reflection symmetry when level 1 is free") {
  for (const Fixing& f : all_fixings(3)) {
    if (f.fixed(1)) continue;
    const IntervalUnion X = mip_x_set(f, 3);
    for (long k = 0; k <= 64; ++k) {
      const Rational x = frac(k, 64), r = 1 - x;
      CHECK(X.contains(x) == X.contains(r));
      const BoundsVector b = bounds_recursion(f, 3);
      if (x < b.a[0] || x > b.b[0]) continue;
      const Rational ex = x * x - greedy_min_g(x, f, {3, 3}).zmin, er = r * r - greedy_min_g(r, f, {3, 3}).zmin;
      CHECK(ex == er);
    }
  }
}

TEST_CASE("gap hull") {
  const IntervalUnion X{{{0, q(1, 4)}, {q(3, 4), 1}}};
  const auto F = [](const Rational& x) { return epi_lower(x, 3); };
  const GapHull h(X, F);
  CHECK(h(q(1, 2)) == (F(q(1, 4)) + F(q(3, 4))) / 2);
  CHECK(h(q(1, 8)) == F(q(1, 8)));
  CHECK(h(q(5, 8)) == (F(q(1, 4)) + 3 * F(q(3, 4))) / 4);
  const GapHull one(IntervalUnion{{{0, 1}}}, F);
  for (long k = 0; k <= 16; ++k) CHECK(one(frac(k, 16)) == F(frac(k, 16)));
  CHECK_THROWS_AS(GapHull(IntervalUnion{}, F), std::invalid_argument);
  CHECK_THROWS_AS(h(Rational(2)), std::domain_error);
}

TEST_CASE("tight lower cuts at the boundary of the restricted x-set") {
  // L = 2, L1 = 3, alpha_2 = 0: boundary {0, 2/8, 6/8, 1}; the tight cuts are z >= 0 (index -2),
  // z >= 2x - 1 (index -1) and the first sawtooth cut F^1 - 2^{-4} (index 1).
  std::set<int> all;
  for (const auto& x : mip_x_set(fixing({{2, 0}}), 2).boundary())
    for (int j : tight_lower_cuts(x, 3)) all.insert(j);
  CHECK(all == std::set<int>{-2, -1, 1});
  CHECK(lower_cut(-2, q(1, 2), {q(1, 2)}) == 0);
  CHECK(lower_cut(-1, q(3, 4), {q(3, 4)}) == q(1, 2));
}

TEST_CASE("univariate sharpness") {
  SUBCASE("tightened sawtooth relaxation is sharp") {
    const SharpnessReport r = check_sharpness(config(Method::HybS, 2, 3), unit_grid(q(1, 64)));
    CHECK(r.sharp);
    CHECK(r.ordering_ok);
    CHECK(r.max_gap == 0);
    CHECK(r.points.size() == 65);
    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j.contains("points"));
  }
  SUBCASE("NMDT and D-NMDT are not sharp at x = 1/2") {
    for (Method m : {Method::NMDT, Method::DNMDT}) {
      const SharpnessReport r = check_sharpness(config(m, 2), {q(1, 2)});
      CHECK_FALSE(r.sharp);
      CHECK(r.ordering_ok);
      CHECK(r.points[0].lp_min == 0);
      CHECK(r.points[0].hull_min > 0);
    }
  }
  SUBCASE("removing the deeper lower cuts destroys sharpness") {
    Tsr tsr = make_tsr({2, 3});
    std::erase_if(tsr.model.rows, [](const Row& r) { return r.name == "Q_x_3"; });
    const SharpnessReport r = check_sharpness_model(tsr.model, tsr.h.x, tsr.h.z, config(Method::HybS, 2, 3),
                                                    unit_grid(q(1, 64)));
    CHECK_FALSE(r.sharp);
    CHECK(r.ordering_ok);
  }
  SUBCASE("serial and parallel reports are identical") {
    const auto grid = unit_grid(q(1, 16));
    CHECK(check_sharpness(config(Method::HybS, 2, 2), grid, {false, 0}).to_json() ==
          check_sharpness(config(Method::HybS, 2, 2), grid, {true, 2}).to_json());
  }
}

TEST_CASE("bilinear sharpness checks") {
  std::vector<std::pair<Rational, Rational>> pts;
  for (long i = 0; i <= 4; ++i)
    for (long k = 0; k <= 4; ++k) pts.emplace_back(frac(i, 4), frac(k, 4));
  pts.emplace_back(0, q(1, 4));
  // The gap at (0, 1/4) needs the McCormick rows off.
  RelaxationConfig cfg = config(Method::HybS, 1, 1);
  cfg.include_mccormick = false;
  const SharpnessReport r = check_sharpness_bilinear(cfg, pts);
  CHECK(r.ordering_ok);
  CHECK_FALSE(r.sharp);
  CHECK(check_sharpness_bilinear(config(Method::McCormickOnly, 1), pts).sharp);
}

TEST_CASE("hereditary sharpness") {
  SUBCASE("all nine patterns at L = L1 = 2") {
    const HereditaryReport r = check_hereditary({2, 2}, unit_grid(q(1, 64)));
    CHECK(r.patterns.size() == 9);
    CHECK(r.hereditarily_sharp);
    for (const auto& p : r.patterns) CHECK(p.ok());
  }
  SUBCASE("Fig. 5 configuration") {
    const HereditaryReport r = check_hereditary({2, 3}, {fixing({{2, 0}})}, unit_grid(q(1, 64)));
    REQUIRE(r.patterns.size() == 1);
    CHECK(r.patterns[0].ok());
    CHECK(r.patterns[0].x_set.boundary() == std::vector<Rational>{0, q(1, 4), q(3, 4), 1});
  }
  SUBCASE("the free pattern matches plain sharpness") {
    const HereditaryReport r = check_hereditary({2, 2}, {Fixing{}}, unit_grid(q(1, 32)));
    const SharpnessReport s = check_sharpness(config(Method::HybS, 2, 2), unit_grid(q(1, 32)));
    REQUIRE(r.patterns.size() == 1);
    CHECK(r.patterns[0].lp_vs_hull.sharp == s.sharp);
    CHECK(r.patterns[0].lp_vs_hull.max_gap == s.max_gap);
  }
  SUBCASE("budget and grid preconditions") {
    CHECK_THROWS_AS(check_hereditary({3, 3}, unit_grid(q(1, 64)), {}, 100), std::invalid_argument);
    CHECK_THROWS_AS(check_hereditary({2, 2}, unit_grid(q(1, 4))), std::invalid_argument);
  }
}

TEST_CASE("non-sharpness counterexamples") {
  const CounterexampleReport r = counterexamples();
  CHECK(r.all_hold);
  CHECK(r.hybs_limit_lp_min == q(-3, 32));
  CHECK(r.bin3_limit_lp_max == q(3, 32));
  CHECK(r.nmdt_mip_min_half == q(1, 4));
  CHECK(r.dnmdt_mip_min_half == q(1, 4));
  CHECK(r.nmdt_witness.member);
  CHECK(r.dnmdt_witness.member);
  for (const auto& g : r.gaps) CHECK(g.strict);
  bool hybs11 = false;
  for (const auto& g : r.gaps)
    if (g.name == "hybs" && g.L == 1 && g.L1 == 1) {
      hybs11 = true;
      CHECK(g.hull == q(-1, 16));
    }
  CHECK(hybs11);
}

TEST_CASE("membership") {
  const TermModel t = make_term_model(config(Method::NMDT, 2), {0, 1}, {0, 1}, true);
  std::vector<Rational> w = nmdt_half_witness(t, config(Method::NMDT, 2));
  CHECK(check_membership(t.model, w).member);
  CHECK_FALSE(check_membership(t.model, w, true).member);
  w[t.z] = -1;
  const MembershipReport bad = check_membership(t.model, w);
  CHECK_FALSE(bad.member);
  CHECK(bad.max_violation > 0);
  CHECK_FALSE(bad.violated.empty());
}
