// Instance parsing, canonicalization, density and the boxQP generator.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "relax/model.hpp"

using namespace relax;

TEST_CASE("minimal instance parses to one variable with objective x^2") {
  const Miqcqp p = parse_instance(R"({"variables":[{"name":"x","lb":0,"ub":1}], "objective":{"quad":[["x","x",1]]}})");
  REQUIRE(p.vars.size() == 1);
  CHECK(p.vars[0].name == "x");
  CHECK(p.vars[0].kind == VarKind::Continuous);
  REQUIRE(p.objective.quad.size() == 1);
  CHECK(p.objective.quad[0].i == 0);
  CHECK(p.objective.quad[0].j == 0);
  CHECK(p.objective.quad[0].coef == 1.0);
  CHECK(p.constraints.empty());
}

TEST_CASE("mirrored quadratic entries merge into one upper-triangular entry") {
  const Miqcqp p = parse_instance(R"({"variables":[{"name":"x","lb":0,"ub":1},{"name":"y","lb":0,"ub":1}],
    "objective":{"quad":[["x","y",2],["y","x",1]]}})");
  REQUIRE(p.objective.quad.size() == 1);
  CHECK(p.objective.quad[0].i == 0);
  CHECK(p.objective.quad[0].j == 1);
  CHECK(p.objective.quad[0].coef == 3.0);
}

TEST_CASE("validation errors") {
  CHECK_THROWS_WITH_AS(parse_instance(R"({"variables":[{"name":"b","kind":"binary"}],
    "objective":{"quad":[["b","b",1]]}})"),
                       doctest::Contains("quadratic term on non-continuous variable"), ModelError);
  CHECK_THROWS_AS(parse_instance("{not json"), ModelError);
  CHECK_THROWS_AS(parse_instance(R"({"variables":[{"name":"x","lb":0,"ub":1}], "objective":{"lin":{"y":1}}})"),
                  ModelError);
  CHECK_THROWS_AS(parse_instance(R"({"variables":[{"name":"x","lb":2,"ub":1}]})"), ModelError);
  CHECK_THROWS_AS(parse_instance(R"({"variables":[{"name":"x","lb":0}], "objective":{"quad":[["x","x",1]]}})"),
                  ModelError);
}

TEST_CASE("density") {
  QuadraticForm f;
  f.quad.push_back({0, 0, 1.0});
  CHECK(density(f, 2) == doctest::Approx(0.25));
  f.quad.push_back({1, 1, 1.0});
  f.quad.push_back({0, 1, 1.0});
  CHECK(density(f, 2) == doctest::Approx(1.0));
  CHECK(density(QuadraticForm{}, 2) == 0.0);
  CHECK(is_dense(f, 2));
}

TEST_CASE("serialize then parse is the identity on canonical instances") {
  const Miqcqp p = random_boxqp(4, 0.7, 11);
  const Miqcqp q = parse_instance(serialize_instance(p));
  CHECK(serialize_instance(q) == serialize_instance(p));
  REQUIRE(q.objective.quad.size() == p.objective.quad.size());
  for (size_t k = 0; k < p.objective.quad.size(); ++k) {
    CHECK(q.objective.quad[k].i == p.objective.quad[k].i);
    CHECK(q.objective.quad[k].j == p.objective.quad[k].j);
    CHECK(q.objective.quad[k].coef == p.objective.quad[k].coef);
  }
}

TEST_CASE("canonicalization is idempotent and value-preserving") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  QuadraticForm f;
  for (int k = 0; k < 12; ++k) f.quad.push_back({static_cast<int>(rng() % 3), static_cast<int>(rng() % 3), u(rng)});
  QuadraticForm g = f;
  g.canonicalize();
  QuadraticForm h = g;
  h.canonicalize();
  CHECK(h.quad.size() == g.quad.size());
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    CHECK(g.evaluate(x) == doctest::Approx(f.evaluate(x)).epsilon(1e-12));
    CHECK(h.evaluate(x) == g.evaluate(x));
  }
}

TEST_CASE("random boxQP is seeded, bounded and dense at density 1") {
  const Miqcqp a = random_boxqp(5, 1.0, 3), b = random_boxqp(5, 1.0, 3);
  CHECK(serialize_instance(a) == serialize_instance(b));
  CHECK(a.objective.quad.size() == 15);
  CHECK(is_dense(a.objective, 5));
  for (const auto& v : a.vars) {
    CHECK(v.lb == 0.0);
    CHECK(v.ub == 1.0);
  }
  CHECK_THROWS_AS(random_boxqp(0, 1.0, 1), std::invalid_argument);
}
