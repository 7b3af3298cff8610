// Exact verification harness: sharpness and hereditary sharpness of the tightened sawtooth
// relaxation, non-sharpness witnesses, and relaxation membership. All arithmetic is rational.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relax/analysis.hpp"
#include "relax/bilinear.hpp"
#include "relax/milp.hpp"
#include "relax/rational.hpp"
#include "relax/sawtooth.hpp"

namespace relax {

/// Fixing alpha_I = values of a subset I of the sawtooth binaries (levels 1..L).
struct Fixing {
  std::map<int, int> values;  // level -> 0 / 1

  bool fixed(int i) const { return values.count(i) > 0; }
  int value(int i) const { return values.at(i); }
  /// Throws std::invalid_argument for levels outside 1..L or values other than 0 / 1.
  void validate(int L) const;
  /// Compact label, e.g. "*0" for alpha_1 free, alpha_2 = 0.
  std::string label(int L) const;
};

/// All 3^L patterns (each level free, 0 or 1), level 1 varying slowest; pattern 0 is all-free.
std::vector<Fixing> all_fixings(int L);

/// Per-level projected bounds [a_i, b_i] of g_i, i = 0..L.
struct BoundsVector {
  std::vector<Rational> a, b;
};
BoundsVector bounds_recursion(const Fixing& fixing, int L);

struct GreedyResult {
  std::vector<Rational> g;  // g_0 .. g_L1
  Rational zmin;            // max over the lower cuts at (x, g)
  int binding = 0;          // index j in {-2, ..., L1} of a cut attaining zmin (smallest such j)
};
/// z-minimizing g of the restricted LP at fixed x. Throws std::domain_error when x is outside
/// [a_0, b_0].
GreedyResult greedy_min_g(const Rational& x, const Fixing& fixing, SawtoothDepths d);
/// Value of lower cut j in {-2, ..., L1} at (x, g).
Rational lower_cut(int j, const Rational& x, const std::vector<Rational>& g);

/// Finite union of disjoint closed intervals, sorted.
struct IntervalUnion {
  std::vector<std::pair<Rational, Rational>> parts;

  bool empty() const { return parts.empty(); }
  bool contains(const Rational& x) const;
  Rational lo() const;  // min of the set (throws when empty)
  Rational hi() const;
  /// Boundary points of the set in increasing order.
  std::vector<Rational> boundary() const;
  std::string str() const;
};
/// x-values with a binary-feasible completion under the fixing (exact interval union).
IntervalUnion mip_x_set(const Fixing& fixing, int L);

/// Convex function F on X extended to conv(X) by linear interpolation across each gap.
class GapHull {
 public:
  /// Throws std::invalid_argument when X is empty.
  GapHull(IntervalUnion X, std::function<Rational(const Rational&)> F);
  /// Throws std::domain_error for x outside conv(X).
  Rational operator()(const Rational& x) const;

 private:
  IntervalUnion X_;
  std::function<Rational(const Rational&)> F_;
};
Rational hull_over_gaps(const IntervalUnion& X, const std::function<Rational(const Rational&)>& F,
                        const Rational& x);

/// Indices j in {-2, ..., L1} of the lower cuts of z = x^2 that are tight for epi_lower at x.
std::vector<int> tight_lower_cuts(const Rational& x, int L1);

// ---------------------------------------------------------------------------------------------
// Sharpness reports

struct PointCheck {
  Rational x, y;  // y unused for univariate checks
  bool lp_feasible = true;
  bool in_hull = true;  // point lies in the projection of the (restricted) MIP onto x / (x, y)
  Rational lp_min, lp_max, hull_min, hull_max;
};

struct SharpnessReport {
  std::string subject;
  std::vector<PointCheck> points;
  Rational max_gap = 0;
  bool ordering_ok = true;  // lp_min <= hull_min <= f <= hull_max <= lp_max everywhere
  bool sharp = true;
  std::string to_json() const;
};

/// Grid 0, step, 2 step, ..., 1 (step must divide 1).
std::vector<Rational> unit_grid(const Rational& step);

/// Univariate sharpness of the z = x^2 relaxation of `cfg` on [0,1] (separable methods: the
/// tightened sawtooth relaxation). LP values from the exact built-in solver; hull values from
/// the closed-form MIP pieces.
SharpnessReport check_sharpness(const RelaxationConfig& cfg, const std::vector<Rational>& grid, Exec exec = {});
/// Same comparison for an explicitly given LP model (e.g. with rows removed) against the hull of `cfg`.
SharpnessReport check_sharpness_model(const MilpModel& model, VarId x, VarId z, const RelaxationConfig& cfg,
                                      const std::vector<Rational>& grid, Exec exec = {});

/// Min / max of z over the convex hull of the projected MIP at a fixed (x, y), computed exactly
/// with a disjunctive (one copy per binary assignment) LP. Throws when more than `max_binaries`.
struct HullRange {
  bool feasible = false;
  Rational lo, hi;
};
HullRange disjunctive_hull_range(const MilpModel& model, const std::vector<std::pair<VarId, Rational>>& point,
                                 VarId z, int max_binaries = 10);
/// Min / max of z in the LP relaxation at a fixed point.
HullRange lp_range(const MilpModel& model, const std::vector<std::pair<VarId, Rational>>& point, VarId z,
                   const std::map<VarId, int>& fixings = {});

/// Bilinear sharpness on the unit box at the given points (LP vs disjunctive hull).
SharpnessReport check_sharpness_bilinear(const RelaxationConfig& cfg,
                                         const std::vector<std::pair<Rational, Rational>>& points, Exec exec = {});

// ---------------------------------------------------------------------------------------------
// Hereditary sharpness

struct PatternReport {
  Fixing fixing;
  IntervalUnion x_set;
  SharpnessReport lp_vs_hull;    // restricted LP vs analytic hull (gap interpolation)
  bool brute_force_agrees = true;  // analytic hull equals hull of enumerated full assignments
  bool x_set_agrees = true;        // grid points of the analytic X^IP equal enumerated ones
  bool infeasible_outside = true;  // restricted LP infeasible at grid points outside conv(X^IP)
  bool ok() const { return lp_vs_hull.sharp && lp_vs_hull.ordering_ok && brute_force_agrees && x_set_agrees &&
                           infeasible_outside; }
};

struct HereditaryReport {
  SawtoothDepths depths;
  std::vector<PatternReport> patterns;
  bool hereditarily_sharp = true;
  std::string to_json() const;
};

/// Checks every fixing pattern of the tightened sawtooth relaxation on the grid. Throws
/// std::invalid_argument when 3^L * grid size exceeds `budget` work items.
HereditaryReport check_hereditary(SawtoothDepths d, const std::vector<Rational>& grid, Exec exec = {},
                                  long budget = 200000);
/// Only the given patterns.
HereditaryReport check_hereditary(SawtoothDepths d, const std::vector<Fixing>& patterns,
                                  const std::vector<Rational>& grid, Exec exec = {});

// ---------------------------------------------------------------------------------------------
// Non-sharpness witnesses and membership

struct MembershipReport {
  bool member = true;
  Rational max_violation = 0;
  std::vector<std::string> violated;  // row or bound names
};
/// Exact check of a full assignment against the rows and bounds; binaries only need to lie in
/// [0,1] unless `integral`.
MembershipReport check_membership(const MilpModel& model, const std::vector<Rational>& point, bool integral = false);

struct GapWitness {
  std::string name;
  std::string side;  // "min" or "max"
  int L = 0, L1 = 0;
  Rational lp, hull;
  bool strict = false;  // LP strictly beyond the hull
};

struct CounterexampleReport {
  std::vector<GapWitness> gaps;
  Rational hybs_limit_lp_min;   // limit LP value ((x+y)^2 - x - y) / 2 at (0, 1/4)
  Rational bin3_limit_lp_max;   // limit LP value (x + y - (x - y)^2) / 2 at (0, 1/4)
  Rational nmdt_mip_min_half;   // exact MIP min of z at x = 1/2 (univariate NMDT, L = 2)
  Rational dnmdt_mip_min_half;  // same for univariate D-NMDT
  MembershipReport nmdt_witness, dnmdt_witness;
  bool all_hold = true;
  std::string to_json() const;
};
CounterexampleReport counterexamples();

/// The z = 0 LP point of univariate NMDT / D-NMDT at x = 1/2 (digits 1/2, residual 2^{-L-1},
/// products and z zero), as a full assignment of the term model.
std::vector<Rational> nmdt_half_witness(const TermModel& t, const RelaxationConfig& cfg);

}  // namespace relax
