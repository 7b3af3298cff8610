#include "relax/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "parallel.hpp"
#include "relax/solver.hpp"

namespace relax {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------------------------
// Fixings, bounds, greedy minimizer

void Fixing::validate(int L) const {
  for (const auto& [i, v] : values) {
    if (i < 1 || i > L) throw std::invalid_argument("fixing level " + std::to_string(i) + " outside 1.." + std::to_string(L));
    if (v != 0 && v != 1) throw std::invalid_argument("fixing values must be 0 or 1");
  }
}

std::string Fixing::label(int L) const {
  std::string s;
  for (int i = 1; i <= L; ++i) s.push_back(fixed(i) ? static_cast<char>('0' + value(i)) : '*');
  return s.empty() ? "-" : s;
}

std::vector<Fixing> all_fixings(int L) {
  if (L < 0 || L > 12) throw std::invalid_argument("all_fixings: L out of range");
  long n = 1;
  for (int i = 0; i < L; ++i) n *= 3;
  std::vector<Fixing> out;
  for (long idx = 0; idx < n; ++idx) {
    Fixing f;
    long r = idx;
    for (int i = L; i >= 1; --i) {
      const int digit = static_cast<int>(r % 3);
      r /= 3;
      if (digit > 0) f.values[i] = digit - 1;
    }
    out.push_back(std::move(f));
  }
  return out;
}

BoundsVector bounds_recursion(const Fixing& fixing, int L) {
  fixing.validate(L);
  BoundsVector bv;
  bv.a.assign(L + 1, Rational(0));
  bv.b.assign(L + 1, Rational(1));
  for (int i = L; i >= 1; --i) {
    const Rational a = bv.a[i], b = bv.b[i];
    if (fixing.fixed(i) && fixing.value(i) == 0) {
      bv.a[i - 1] = a / 2;
      bv.b[i - 1] = b / 2;
    } else if (fixing.fixed(i)) {
      bv.a[i - 1] = 1 - b / 2;
      bv.b[i - 1] = 1 - a / 2;
    } else {
      bv.a[i - 1] = a / 2;
      bv.b[i - 1] = 1 - a / 2;
    }
  }
  return bv;
}

Rational lower_cut(int j, const Rational& x, const std::vector<Rational>& g) {
  if (j == -2) return Rational(0);
  if (j == -1) return 2 * x - 1;
  if (j < -2 || j + 1 > static_cast<int>(g.size())) throw std::invalid_argument("lower_cut: index out of range");
  Rational f = x;
  for (int i = 1; i <= j; ++i) f -= pow2<Rational>(-2 * i) * g[i];
  return f - pow2<Rational>(-2 * j - 2);
}

GreedyResult greedy_min_g(const Rational& x, const Fixing& fixing, SawtoothDepths d) {
  check_depths(d);
  const BoundsVector bv = bounds_recursion(fixing, d.L);
  if (x < bv.a[0] || x > bv.b[0])
    throw std::domain_error("greedy_min_g: x = " + str(x) + " outside [" + str(bv.a[0]) + ", " + str(bv.b[0]) + "]");
  GreedyResult r;
  r.g.push_back(x);
  for (int i = 1; i <= d.L1; ++i) {
    const Rational& p = r.g.back();
    if (i <= d.L && fixing.fixed(i)) {
      r.g.push_back(fixing.value(i) == 0 ? Rational(2 * p) : Rational(2 * (1 - p)));
    } else {
      const Rational b = i <= d.L ? bv.b[i] : Rational(1);
      r.g.push_back(tmin<Rational>(b, tmin<Rational>(Rational(2 * p), Rational(2 * (1 - p)))));
    }
  }
  r.binding = -2;
  r.zmin = lower_cut(-2, x, r.g);
  for (int j = -1; j <= d.L1; ++j) {
    const Rational v = lower_cut(j, x, r.g);
    if (v > r.zmin) {
      r.zmin = v;
      r.binding = j;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------------------------
// Interval unions and gap interpolation

bool IntervalUnion::contains(const Rational& x) const {
  for (const auto& [lo, hi] : parts)
    if (x >= lo && x <= hi) return true;
  return false;
}

Rational IntervalUnion::lo() const {
  if (parts.empty()) throw std::invalid_argument("empty interval union");
  return parts.front().first;
}

Rational IntervalUnion::hi() const {
  if (parts.empty()) throw std::invalid_argument("empty interval union");
  return parts.back().second;
}

std::vector<Rational> IntervalUnion::boundary() const {
  std::vector<Rational> out;
  for (const auto& [lo, hi] : parts) {
    out.push_back(lo);
    if (hi != lo) out.push_back(hi);
  }
  return out;
}

std::string IntervalUnion::str() const {
  if (parts.empty()) return "{}";
  std::string s;
  for (size_t k = 0; k < parts.size(); ++k) {
    if (k) s += " u ";
    s += "[" + relax::str(parts[k].first) + ", " + relax::str(parts[k].second) + "]";
  }
  return s;
}

IntervalUnion mip_x_set(const Fixing& fixing, int L) {
  fixing.validate(L);
  if (L > 20) throw std::invalid_argument("mip_x_set: L too large");
  std::vector<std::pair<Rational, Rational>> pieces;
  for (long mask = 0; mask < (1L << L); ++mask) {
    bool ok = true;
    for (int i = 1; i <= L && ok; ++i)
      if (fixing.fixed(i) && fixing.value(i) != ((mask >> (i - 1)) & 1)) ok = false;
    if (!ok) continue;
    Rational lo = 0, hi = 1;  // range of g_L
    for (int i = L; i >= 1; --i) {
      if (((mask >> (i - 1)) & 1) == 0) {
        lo /= 2;
        hi /= 2;
      } else {
        const Rational nlo = 1 - hi / 2, nhi = 1 - lo / 2;
        lo = nlo;
        hi = nhi;
      }
    }
    pieces.push_back({lo, hi});
  }
  std::sort(pieces.begin(), pieces.end());
  IntervalUnion u;
  for (const auto& p : pieces) {
    if (!u.parts.empty() && p.first <= u.parts.back().second)
      u.parts.back().second = tmax(u.parts.back().second, p.second);
    else
      u.parts.push_back(p);
  }
  return u;
}

GapHull::GapHull(IntervalUnion X, std::function<Rational(const Rational&)> F) : X_(std::move(X)), F_(std::move(F)) {
  if (X_.empty()) throw std::invalid_argument("hull_over_gaps: empty set");
}

Rational GapHull::operator()(const Rational& x) const {
  if (x < X_.lo() || x > X_.hi()) throw std::domain_error("hull_over_gaps: point outside conv(X)");
  for (size_t k = 0; k < X_.parts.size(); ++k) {
    const auto& [lo, hi] = X_.parts[k];
    if (x >= lo && x <= hi) return F_(x);
    if (k + 1 < X_.parts.size() && x > hi && x < X_.parts[k + 1].first) {
      const Rational xm = hi, xp = X_.parts[k + 1].first;
      const Rational lam = (xp - x) / (xp - xm);
      return lam * F_(xm) + (1 - lam) * F_(xp);
    }
  }
  throw std::logic_error("hull_over_gaps: unreachable");
}

Rational hull_over_gaps(const IntervalUnion& X, const std::function<Rational(const Rational&)>& F, const Rational& x) {
  return GapHull(X, F)(x);
}

std::vector<int> tight_lower_cuts(const Rational& x, int L1) {
  if (L1 < 0) throw std::invalid_argument("depth must be nonnegative");
  const Rational e = epi_lower(x, L1);
  std::vector<Rational> g{x};
  for (int i = 1; i <= L1; ++i) g.push_back(tooth_step(g.back()));
  std::vector<int> out;
  for (int j = -2; j <= L1; ++j)
    if (lower_cut(j, x, g) == e) out.push_back(j);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Closed-form MIP pieces of the univariate relaxations (unit box)

namespace {

struct Affine {
  Rational a, b;
  Rational operator()(const Rational& x) const { return a * x + b; }
};

struct Cell {
  Rational lo, hi;
  std::vector<Affine> lower, upper;  // lower envelope = max, upper envelope = min
  Rational low_at(const Rational& x) const {
    Rational v = lower.front()(x);
    for (const auto& f : lower) v = tmax(v, f(x));
    return v;
  }
  Rational up_at(const Rational& x) const {
    Rational v = upper.front()(x);
    for (const auto& f : upper) v = tmin(v, f(x));
    return v;
  }
};

std::vector<Affine> tangents(int L1) {
  std::vector<Affine> t;
  const long n = 1L << (L1 + 1);
  for (long k = 0; k <= n; ++k) {
    const Rational s = Rational(k) / Rational(n);
    t.push_back({2 * s, -s * s});
  }
  return t;
}

std::vector<Cell> univariate_pieces(const RelaxationConfig& cfg) {
  cfg.validate();
  std::vector<Cell> cells;
  if (cfg.method == Method::McCormickOnly) {
    cells.push_back({0, 1, {{0, 0}, {2, -1}}, {{1, 0}}});
    return cells;
  }
  const int L = cfg.L;
  const long n = 1L << L;
  const Rational h = pow2<Rational>(-L);
  for (long k = 0; k < n; ++k) {
    const Rational c = Rational(k) * h;
    Cell cell{c, c + h, {}, {}};
    switch (cfg.method) {
      case Method::Bin2:
      case Method::Bin3:
      case Method::HybS:
        cell.lower = tangents(cfg.l1());
        cell.upper = {{2 * c + h, -c * (c + h)}};
        break;
      case Method::NMDT:
      case Method::TNMDT:
        cell.lower = {{c, 0}, {c + 1 + h, -c - h}};
        cell.upper = {{c + h, 0}, {c + 1, -c}};
        if (cfg.method == Method::TNMDT)
          for (const auto& t : tangents(cfg.l1())) cell.lower.push_back(t);
        break;
      case Method::DNMDT:
      case Method::TDNMDT:
        cell.lower = {{2 * c, -c * c}, {2 * c + 2 * h, -c * c - 2 * h * c - h * h}};
        if (cfg.method == Method::TDNMDT) cell.lower = tangents(cfg.l1());
        cell.upper = {{2 * c + h, -c * c - h * c}};
        break;
      case Method::McCormickOnly: break;
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

/// Piecewise-linear function through sorted vertices.
struct Pwl {
  std::vector<Rational> xs, vs;
  Rational operator()(const Rational& x) const {
    if (xs.empty() || x < xs.front() || x > xs.back()) throw std::domain_error("hull evaluated outside its domain");
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    const size_t k = static_cast<size_t>(it - xs.begin());
    if (xs[k] == x) return vs[k];
    const Rational t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return vs[k - 1] + t * (vs[k] - vs[k - 1]);
  }
};

/// Lower convex (lower = true) or upper concave hull of a point set.
Pwl hull_of(std::vector<std::pair<Rational, Rational>> pts, bool lower) {
  std::sort(pts.begin(), pts.end(), [&](const auto& p, const auto& q) {
    if (p.first != q.first) return p.first < q.first;
    return lower ? p.second < q.second : p.second > q.second;
  });
  std::vector<std::pair<Rational, Rational>> st;
  for (const auto& p : pts) {
    if (!st.empty() && st.back().first == p.first) continue;  // keep the extreme value per x
    while (st.size() >= 2) {
      const auto& o = st[st.size() - 2];
      const auto& a = st.back();
      const Rational cr = (a.first - o.first) * (p.second - o.second) - (a.second - o.second) * (p.first - o.first);
      if (lower ? cr <= 0 : cr >= 0)
        st.pop_back();
      else
        break;
    }
    st.push_back(p);
  }
  Pwl f;
  for (const auto& [x, v] : st) {
    f.xs.push_back(x);
    f.vs.push_back(v);
  }
  return f;
}

/// Candidate vertices of the per-cell envelopes: cell ends and line intersections inside cells.
std::vector<std::pair<Rational, Rational>> piece_vertices(const std::vector<Cell>& cells, bool lower) {
  std::vector<std::pair<Rational, Rational>> pts;
  for (const auto& c : cells) {
    const auto& lines = lower ? c.lower : c.upper;
    auto val = [&](const Rational& x) { return lower ? c.low_at(x) : c.up_at(x); };
    pts.push_back({c.lo, val(c.lo)});
    pts.push_back({c.hi, val(c.hi)});
    for (size_t i = 0; i < lines.size(); ++i)
      for (size_t j = i + 1; j < lines.size(); ++j) {
        if (lines[i].a == lines[j].a) continue;
        const Rational x = (lines[j].b - lines[i].b) / (lines[i].a - lines[j].a);
        if (x > c.lo && x < c.hi) pts.push_back({x, val(x)});
      }
  }
  return pts;
}

Rational exact_of(double v) { return to_rational(v); }

double exact_double(const Rational& v) {
  const double d = v.get_d();
  if (to_rational(d) != v) throw std::invalid_argument("verification point " + str(v) + " is not a binary fraction");
  return d;
}

ordered_json rational_json(const Rational& v) { return str(v); }

void finalize(SharpnessReport& r) {
  r.max_gap = 0;
  r.sharp = true;
  for (const auto& p : r.points) {
    if (!p.lp_feasible || !p.in_hull) continue;
    r.max_gap = tmax(r.max_gap, tmax(Rational(p.hull_min - p.lp_min), Rational(p.lp_max - p.hull_max)));
  }
  r.sharp = r.max_gap == 0;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// LP and hull ranges

HullRange lp_range(const MilpModel& model, const std::vector<std::pair<VarId, Rational>>& point, VarId z,
                   const std::map<VarId, int>& fixings) {
  MilpModel m = lp_relax(model);
  for (const auto& [v, val] : point) m.vars.at(v).lb = m.vars.at(v).ub = exact_double(val);
  for (const auto& [v, val] : fixings) m.vars.at(v).lb = m.vars.at(v).ub = val;
  HullRange r;
  const SolveResult lo = optimize_var(m, z, Direction::Minimize);
  if (lo.status == SolveStatus::Infeasible) return r;
  if (lo.status == SolveStatus::Unbounded) throw SolverError("lp_range: z unbounded below");
  const SolveResult hi = optimize_var(m, z, Direction::Maximize);
  if (hi.status != SolveStatus::Optimal) throw SolverError("lp_range: z unbounded above");
  r.feasible = true;
  r.lo = *lo.exact_objective;
  r.hi = *hi.exact_objective;
  return r;
}

HullRange disjunctive_hull_range(const MilpModel& model, const std::vector<std::pair<VarId, Rational>>& point,
                                 VarId z, int max_binaries) {
  std::vector<VarId> bins;
  for (int k = 0; k < model.n_vars(); ++k)
    if (model.vars[k].kind == VarKind::Binary) bins.push_back(k);
  if (static_cast<int>(bins.size()) > max_binaries)
    throw std::invalid_argument("disjunctive hull: " + std::to_string(bins.size()) + " binaries exceed the limit");
  std::vector<bool> keep(model.n_vars(), false);
  keep[z] = true;
  for (const auto& [v, val] : point) keep[v] = true;

  MilpModel D;
  std::vector<VarId> agg(model.n_vars(), -1);
  for (int k = 0; k < model.n_vars(); ++k)
    if (keep[k]) agg[k] = D.add_var("agg_" + model.vars[k].name, -kInf, kInf);
  for (const auto& [v, val] : point) D.vars[agg[v]].lb = D.vars[agg[v]].ub = exact_double(val);
  std::vector<LinExpr> link(model.n_vars());
  LinExpr lambda_sum;
  int pieces = 0;
  for (long mask = 0; mask < (1L << bins.size()); ++mask) {
    std::map<VarId, int> fix;
    for (size_t b = 0; b < bins.size(); ++b) fix[bins[b]] = static_cast<int>((mask >> b) & 1);
    {
      MilpModel probe = model;
      probe.objective.clear();
      if (solve_builtin(probe, fix).status != SolveStatus::Optimal) continue;
    }
    ++pieces;
    const std::string tag = "k" + std::to_string(mask) + "_";
    const VarId lam = D.add_var(tag + "lambda", 0, 1);
    lambda_sum += LinExpr::var(lam);
    std::vector<VarId> w(model.n_vars(), -1);
    for (int k = 0; k < model.n_vars(); ++k) {
      if (model.vars[k].kind == VarKind::Binary) continue;
      w[k] = D.add_var(tag + model.vars[k].name, -kInf, kInf);
      if (std::isfinite(model.vars[k].lb))
        D.add_row(LinExpr::var(w[k]), Sense::Ge, LinExpr::var(lam, model.vars[k].lb));
      if (std::isfinite(model.vars[k].ub))
        D.add_row(LinExpr::var(w[k]), Sense::Le, LinExpr::var(lam, model.vars[k].ub));
      if (keep[k]) link[k] += LinExpr::var(w[k]);
    }
    for (const Row& r : model.rows) {
      LinExpr e;
      double lam_coef = -r.rhs;
      for (const auto& [v, c] : r.coefs) {
        if (model.vars[v].kind == VarKind::Binary)
          lam_coef += c * fix.at(v);
        else
          e += LinExpr::var(w[v], c);
      }
      e += LinExpr::var(lam, lam_coef);
      D.add_row(e, r.sense, LinExpr(0.0));
    }
  }
  if (pieces == 0) return {};
  D.add_row(lambda_sum, Sense::Eq, LinExpr(1.0), "convexity");
  for (int k = 0; k < model.n_vars(); ++k)
    if (keep[k]) D.add_row(LinExpr::var(agg[k]), Sense::Eq, link[k], "link_" + model.vars[k].name);
  HullRange r;
  const SolveResult lo = optimize_var(D, agg[z], Direction::Minimize);
  if (lo.status == SolveStatus::Infeasible) return r;
  if (lo.status == SolveStatus::Unbounded) throw SolverError("disjunctive hull: z unbounded below");
  const SolveResult hi = optimize_var(D, agg[z], Direction::Maximize);
  if (hi.status != SolveStatus::Optimal) throw SolverError("disjunctive hull: z unbounded above");
  r.feasible = true;
  r.lo = *lo.exact_objective;
  r.hi = *hi.exact_objective;
  return r;
}

// ---------------------------------------------------------------------------------------------
// Sharpness

std::vector<Rational> unit_grid(const Rational& step) {
  if (!(step > 0) || step > 1) throw std::invalid_argument("grid step must lie in (0, 1]");
  const Rational n = 1 / step;
  if (!is_integer(n)) throw std::invalid_argument("grid step must divide 1");
  std::vector<Rational> g;
  const long count = floor_int(n);
  for (long k = 0; k <= count; ++k) g.push_back(Rational(k) * step);
  return g;
}

namespace {

SharpnessReport compare_univariate(const MilpModel& model, VarId x, VarId z, const Pwl& hull_lo, const Pwl& hull_hi,
                                   const std::vector<Rational>& grid, const std::map<VarId, int>& fixings,
                                   const IntervalUnion& X, const Exec& exec) {
  SharpnessReport r;
  r.points.resize(grid.size());
  detail::for_each_index(static_cast<long>(grid.size()), exec.parallel, exec.jobs, [&](long k) {
    PointCheck& p = r.points[k];
    p.x = grid[k];
    const HullRange lp = lp_range(model, {{x, grid[k]}}, z, fixings);
    p.lp_feasible = lp.feasible;
    p.in_hull = X.contains(grid[k]);
    if (lp.feasible) {
      p.lp_min = lp.lo;
      p.lp_max = lp.hi;
    }
    if (grid[k] >= X.lo() && grid[k] <= X.hi()) {
      p.hull_min = hull_lo(grid[k]);
      p.hull_max = hull_hi(grid[k]);
    }
  });
  for (auto& p : r.points) {
    const bool in_conv = p.x >= X.lo() && p.x <= X.hi();
    if (in_conv && !p.lp_feasible) r.ordering_ok = false;  // the LP must cover conv(X)
    if (!in_conv || !p.lp_feasible) {
      p.in_hull = false;
      continue;
    }
    p.in_hull = true;
    const Rational f = p.x * p.x;
    bool ok = p.lp_min <= p.hull_min && p.hull_max <= p.lp_max;
    if (X.contains(p.x)) ok = ok && p.hull_min <= f && f <= p.hull_max;
    r.ordering_ok = r.ordering_ok && ok;
  }
  finalize(r);
  return r;
}

}  // namespace

SharpnessReport check_sharpness_model(const MilpModel& model, VarId x, VarId z, const RelaxationConfig& cfg,
                                      const std::vector<Rational>& grid, Exec exec) {
  const std::vector<Cell> cells = univariate_pieces(cfg);
  const Pwl lo = hull_of(piece_vertices(cells, true), true);
  const Pwl hi = hull_of(piece_vertices(cells, false), false);
  IntervalUnion X;
  X.parts.push_back({Rational(0), Rational(1)});
  SharpnessReport r = compare_univariate(model, x, z, lo, hi, grid, {}, X, exec);
  r.subject = "univariate " + to_string(cfg.method) + " L=" + std::to_string(cfg.L) + " L1=" + std::to_string(cfg.l1());
  return r;
}

SharpnessReport check_sharpness(const RelaxationConfig& cfg, const std::vector<Rational>& grid, Exec exec) {
  const TermModel t = make_term_model(cfg, {0, 1}, {0, 1}, true);
  SharpnessReport r = check_sharpness_model(t.model, t.x, t.z, cfg, grid, exec);
  if (is_separable(cfg.method))
    r.subject = "tightened sawtooth L=" + std::to_string(cfg.L) + " L1=" + std::to_string(cfg.l1());
  return r;
}

SharpnessReport check_sharpness_bilinear(const RelaxationConfig& cfg,
                                         const std::vector<std::pair<Rational, Rational>>& points, Exec exec) {
  const TermModel t = make_term_model(cfg, {0, 1}, {0, 1}, false);
  SharpnessReport r;
  r.subject = "bilinear " + to_string(cfg.method) + " L=" + std::to_string(cfg.L) + " L1=" + std::to_string(cfg.l1()) +
              (cfg.include_mccormick ? "" : " (no McCormick)");
  r.points.resize(points.size());
  detail::for_each_index(static_cast<long>(points.size()), exec.parallel, exec.jobs, [&](long k) {
    PointCheck& p = r.points[k];
    p.x = points[k].first;
    p.y = points[k].second;
    const std::vector<std::pair<VarId, Rational>> pt{{t.x, p.x}, {t.y, p.y}};
    const HullRange lp = lp_range(t.model, pt, t.z);
    const HullRange hull = disjunctive_hull_range(t.model, pt, t.z);
    p.lp_feasible = lp.feasible;
    p.in_hull = hull.feasible;
    p.lp_min = lp.lo;
    p.lp_max = lp.hi;
    p.hull_min = hull.lo;
    p.hull_max = hull.hi;
  });
  for (const auto& p : r.points) {
    const Rational f = p.x * p.y;
    if (!p.lp_feasible || !p.in_hull) {
      r.ordering_ok = false;
      continue;
    }
    r.ordering_ok = r.ordering_ok && p.lp_min <= p.hull_min && p.hull_min <= f && f <= p.hull_max &&
                    p.hull_max <= p.lp_max;
  }
  finalize(r);
  return r;
}

std::string SharpnessReport::to_json() const {
  ordered_json j;
  j["subject"] = subject;
  j["verdict"] = sharp ? "sharp" : "not sharp";
  j["sharp"] = sharp;
  j["ordering_ok"] = ordering_ok;
  j["max_gap"] = rational_json(max_gap);
  ordered_json pts = ordered_json::array();
  for (const auto& p : points) {
    ordered_json q;
    q["x"] = rational_json(p.x);
    if (p.y != 0 || subject.rfind("bilinear", 0) == 0) q["y"] = rational_json(p.y);
    q["lp_feasible"] = p.lp_feasible;
    if (p.lp_feasible) {
      q["lp_min"] = rational_json(p.lp_min);
      q["lp_max"] = rational_json(p.lp_max);
    }
    if (p.in_hull) {
      q["hull_min"] = rational_json(p.hull_min);
      q["hull_max"] = rational_json(p.hull_max);
    }
    pts.push_back(q);
  }
  j["points"] = pts;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------------------------
// Hereditary sharpness

HereditaryReport check_hereditary(SawtoothDepths d, const std::vector<Rational>& grid, Exec exec, long budget) {
  check_depths(d);
  if (d.L > 12) throw std::invalid_argument("budget exceeded: L too large for enumeration");
  long patterns = 1;
  for (int i = 0; i < d.L; ++i) patterns *= 3;
  if (patterns * static_cast<long>(grid.size()) > budget)
    throw std::invalid_argument("budget exceeded: " + std::to_string(patterns) + " patterns x " +
                                std::to_string(grid.size()) + " grid points");
  return check_hereditary(d, all_fixings(d.L), grid, exec);
}

HereditaryReport check_hereditary(SawtoothDepths d, const std::vector<Fixing>& patterns,
                                  const std::vector<Rational>& grid, Exec exec) {
  check_depths(d);
  // The brute-force hull interpolates grid values, so every kink of the exact hull must be a grid point.
  for (const Rational& kink : unit_grid(pow2<Rational>(-d.L1 - 2)))
    if (!std::binary_search(grid.begin(), grid.end(), kink))
      throw std::invalid_argument("hereditary check: grid must be sorted and contain all multiples of 2^-(L1+2)");
  RelaxationConfig cfg;
  cfg.method = Method::HybS;  // separable methods relax x^2 by the tightened sawtooth relaxation
  cfg.L = d.L;
  cfg.L1 = d.L1;
  const TermModel t = make_term_model(cfg, {0, 1}, {0, 1}, true);
  std::vector<VarId> alpha(d.L + 1, -1);
  for (int i = 1; i <= d.L; ++i) {
    alpha[i] = t.model.find("alpha_x_" + std::to_string(i));
    if (alpha[i] < 0) throw std::logic_error("hereditary check: missing alpha variable");
  }
  const long nfull = 1L << d.L;
  const long ng = static_cast<long>(grid.size());
  // Brute force: LP with every binary fixed, per full assignment and grid point.
  std::vector<HullRange> full(nfull * ng);
  detail::for_each_index(nfull * ng, exec.parallel, exec.jobs, [&](long idx) {
    const long mask = idx / ng, k = idx % ng;
    std::map<VarId, int> fix;
    for (int i = 1; i <= d.L; ++i) fix[alpha[i]] = static_cast<int>((mask >> (i - 1)) & 1);
    full[idx] = lp_range(t.model, {{t.x, grid[k]}}, t.z, fix);
  });

  HereditaryReport rep;
  rep.depths = d;
  rep.patterns.resize(patterns.size());
  detail::for_each_index(static_cast<long>(patterns.size()), exec.parallel, exec.jobs, [&](long pi) {
    PatternReport& pr = rep.patterns[pi];
    pr.fixing = patterns[pi];
    pr.x_set = mip_x_set(pr.fixing, d.L);
    std::map<VarId, int> fix;
    for (const auto& [i, v] : pr.fixing.values) fix[alpha[i]] = v;
    const int L1 = d.L1, L = d.L;
    const GapHull lower(pr.x_set, [L1](const Rational& x) { return epi_lower(x, L1); });
    const Rational a = pr.x_set.lo(), b = pr.x_set.hi();
    const Rational fa = pwl_square(a, L), fb = pwl_square(b, L);
    Pwl upper;
    upper.xs = {a};
    upper.vs = {fa};
    if (b != a) {
      upper.xs.push_back(b);
      upper.vs.push_back(fb);
    }
    Pwl lower_pwl;  // analytic lower hull sampled on the grid (exact: kinks are grid points)
    for (const Rational& x : grid)
      if (x >= a && x <= b) {
        lower_pwl.xs.push_back(x);
        lower_pwl.vs.push_back(lower(x));
      }
    Exec serial;
    pr.lp_vs_hull = compare_univariate(t.model, t.x, t.z, lower_pwl, upper, grid, fix, pr.x_set, serial);
    pr.lp_vs_hull.subject = "pattern " + pr.fixing.label(L);
    // Brute-force restricted MIP values and their hulls.
    std::vector<std::pair<Rational, Rational>> lo_pts, hi_pts;
    for (long k = 0; k < ng; ++k) {
      bool any = false;
      Rational mn, mx;
      for (long mask = 0; mask < nfull; ++mask) {
        bool consistent = true;
        for (const auto& [i, v] : pr.fixing.values)
          if (((mask >> (i - 1)) & 1) != v) consistent = false;
        const HullRange& h = full[mask * ng + k];
        if (!consistent || !h.feasible) continue;
        mn = any ? tmin(mn, h.lo) : h.lo;
        mx = any ? tmax(mx, h.hi) : h.hi;
        any = true;
      }
      if (any != pr.x_set.contains(grid[k])) pr.x_set_agrees = false;
      if (any) {
        lo_pts.push_back({grid[k], mn});
        hi_pts.push_back({grid[k], mx});
      }
      const bool in_conv = grid[k] >= a && grid[k] <= b;
      if (!in_conv && pr.lp_vs_hull.points[k].lp_feasible) pr.infeasible_outside = false;
    }
    if (lo_pts.empty()) {
      pr.brute_force_agrees = false;
      return;
    }
    const Pwl blo = hull_of(lo_pts, true), bhi = hull_of(hi_pts, false);
    for (const Rational& x : grid) {
      if (x < a || x > b) continue;
      if (x < blo.xs.front() || x > blo.xs.back() || blo(x) != lower(x) || bhi(x) != upper(x)) {
        pr.brute_force_agrees = false;
        break;
      }
    }
  });
  for (const auto& p : rep.patterns) rep.hereditarily_sharp = rep.hereditarily_sharp && p.ok();
  return rep;
}

std::string HereditaryReport::to_json() const {
  ordered_json j;
  j["L"] = depths.L;
  j["L1"] = depths.L1;
  j["verdict"] = hereditarily_sharp ? "hereditarily sharp" : "not hereditarily sharp";
  j["hereditarily_sharp"] = hereditarily_sharp;
  ordered_json ps = ordered_json::array();
  for (const auto& p : patterns) {
    ordered_json q;
    q["pattern"] = p.fixing.label(depths.L);
    q["x_set"] = p.x_set.str();
    q["sharp"] = p.lp_vs_hull.sharp;
    q["max_gap"] = rational_json(p.lp_vs_hull.max_gap);
    q["ordering_ok"] = p.lp_vs_hull.ordering_ok;
    q["brute_force_agrees"] = p.brute_force_agrees;
    q["x_set_agrees"] = p.x_set_agrees;
    q["infeasible_outside"] = p.infeasible_outside;
    ordered_json tight = ordered_json::array();
    for (const Rational& x : p.x_set.boundary()) {
      ordered_json e;
      e["x"] = rational_json(x);
      e["tight_cuts"] = tight_lower_cuts(x, depths.L1);
      tight.push_back(e);
    }
    q["boundary"] = tight;
    ps.push_back(q);
  }
  j["patterns"] = ps;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------------------------
// Membership and witnesses

MembershipReport check_membership(const MilpModel& model, const std::vector<Rational>& point, bool integral) {
  if (static_cast<int>(point.size()) != model.n_vars())
    throw std::invalid_argument("membership: point has " + std::to_string(point.size()) + " entries, model has " +
                                std::to_string(model.n_vars()) + " variables");
  MembershipReport r;
  auto record = [&](const Rational& viol, const std::string& what) {
    if (viol > 0) {
      r.member = false;
      r.violated.push_back(what);
      r.max_violation = tmax(r.max_violation, viol);
    }
  };
  for (int k = 0; k < model.n_vars(); ++k) {
    const MilpVar& v = model.vars[k];
    if (std::isfinite(v.lb)) record(exact_of(v.lb) - point[k], "lb:" + v.name);
    if (std::isfinite(v.ub)) record(point[k] - exact_of(v.ub), "ub:" + v.name);
    if (integral && v.kind == VarKind::Binary && !(point[k] == 0 || point[k] == 1)) record(Rational(1, 2), "int:" + v.name);
  }
  for (const Row& row : model.rows) {
    Rational lhs = 0;
    for (const auto& [v, c] : row.coefs) lhs += exact_of(c) * point[v];
    const Rational d = lhs - exact_of(row.rhs);
    switch (row.sense) {
      case Sense::Le: record(d, row.name); break;
      case Sense::Ge: record(Rational(-d), row.name); break;
      case Sense::Eq: record(d < 0 ? Rational(-d) : d, row.name); break;
    }
  }
  return r;
}

std::vector<Rational> nmdt_half_witness(const TermModel& t, const RelaxationConfig& cfg) {
  if (cfg.method != Method::NMDT && cfg.method != Method::DNMDT)
    throw std::invalid_argument("nmdt_half_witness: univariate NMDT or D-NMDT only");
  std::vector<Rational> v(t.model.n_vars(), Rational(0));
  const Interval b{t.model.vars[t.x].lb, t.model.vars[t.x].ub};
  if (b.lo != 0.0 || b.hi != 1.0) throw std::invalid_argument("nmdt_half_witness: unit box only");
  v[t.x] = Rational(1, 2);
  auto set = [&](const std::string& name, const Rational& val) {
    const VarId id = t.model.find(name);
    if (id < 0) throw std::logic_error("nmdt_half_witness: missing variable " + name);
    v[id] = val;
  };
  const std::string nx = t.model.vars[t.x].name;
  set("xhat_" + nx, Rational(1, 2));
  for (int j = 1; j <= cfg.L; ++j) set("beta_" + nx + "_" + std::to_string(j), Rational(1, 2));
  set("dx_" + nx, pow2<Rational>(-cfg.L - 1));
  return v;  // products, residual product, zhat and z stay 0
}

namespace {

GapWitness bilinear_gap(const std::string& name, Method method, int L, int L1, bool maximize) {
  RelaxationConfig cfg;
  cfg.method = method;
  cfg.L = L;
  cfg.L1 = L1;
  cfg.include_mccormick = false;
  const TermModel t = make_term_model(cfg, {0, 1}, {0, 1}, false);
  const std::vector<std::pair<VarId, Rational>> pt{{t.x, Rational(0)}, {t.y, Rational(1, 4)}};
  const HullRange lp = lp_range(t.model, pt, t.z);
  const HullRange hull = disjunctive_hull_range(t.model, pt, t.z);
  GapWitness w;
  w.name = name;
  w.side = maximize ? "max" : "min";
  w.L = L;
  w.L1 = L1;
  w.lp = maximize ? lp.hi : lp.lo;
  w.hull = maximize ? hull.hi : hull.lo;
  w.strict = lp.feasible && hull.feasible && (maximize ? w.lp > w.hull : w.lp < w.hull);
  return w;
}

GapWitness univariate_gap(const std::string& name, Method method, int L, Rational& mip_min,
                          MembershipReport& membership) {
  RelaxationConfig cfg;
  cfg.method = method;
  cfg.L = L;
  const TermModel t = make_term_model(cfg, {0, 1}, {0, 1}, true);
  const Rational half(1, 2);
  const HullRange lp = lp_range(t.model, {{t.x, half}}, t.z);
  const HullRange hull = disjunctive_hull_range(t.model, {{t.x, half}}, t.z);
  mip_min = envelope_square<Rational>(cfg, {0, 1}, half).lo;
  membership = check_membership(lp_relax(t.model), nmdt_half_witness(t, cfg));
  GapWitness w;
  w.name = name;
  w.side = "min";
  w.L = L;
  w.L1 = cfg.l1();
  w.lp = lp.lo;
  w.hull = hull.lo;
  w.strict = lp.feasible && hull.feasible && w.lp < w.hull;
  return w;
}

}  // namespace

CounterexampleReport counterexamples() {
  CounterexampleReport r;
  const Rational x(0), y(1, 4);
  r.hybs_limit_lp_min = ((x + y) * (x + y) - x - y) / 2;
  r.bin3_limit_lp_max = (x + y - (x - y) * (x - y)) / 2;
  for (auto [L, L1] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}}) {
    r.gaps.push_back(bilinear_gap("hybs", Method::HybS, L, L1, false));
    r.gaps.push_back(bilinear_gap("bin2", Method::Bin2, L, L1, false));
    r.gaps.push_back(bilinear_gap("bin3", Method::Bin3, L, L1, true));
  }
  r.gaps.push_back(univariate_gap("univariate nmdt", Method::NMDT, 2, r.nmdt_mip_min_half, r.nmdt_witness));
  r.gaps.push_back(univariate_gap("univariate dnmdt", Method::DNMDT, 2, r.dnmdt_mip_min_half, r.dnmdt_witness));
  r.all_hold = r.nmdt_witness.member && r.dnmdt_witness.member;
  for (const auto& g : r.gaps) r.all_hold = r.all_hold && g.strict;
  return r;
}

std::string CounterexampleReport::to_json() const {
  ordered_json j;
  j["verdict"] = all_hold ? "all witnesses confirmed" : "witness failed";
  j["all_hold"] = all_hold;
  ordered_json gs = ordered_json::array();
  for (const auto& g : gaps) {
    ordered_json q;
    q["relaxation"] = g.name;
    q["side"] = g.side;
    q["L"] = g.L;
    q["L1"] = g.L1;
    q["lp"] = rational_json(g.lp);
    q["hull"] = rational_json(g.hull);
    q["strict_gap"] = g.strict;
    gs.push_back(q);
  }
  j["gaps"] = gs;
  j["point"] = {"0", "1/4"};
  j["hybs_limit_lp_min"] = rational_json(hybs_limit_lp_min);
  j["bin3_limit_lp_max"] = rational_json(bin3_limit_lp_max);
  j["unscaled_limit_lp_min"] = rational_json(2 * hybs_limit_lp_min);
  j["nmdt_mip_min_at_half"] = rational_json(nmdt_mip_min_half);
  j["dnmdt_mip_min_at_half"] = rational_json(dnmdt_mip_min_half);
  j["nmdt_witness_member"] = nmdt_witness.member;
  j["dnmdt_witness_member"] = dnmdt_witness.member;
  return j.dump(2) + "\n";
}

}  // namespace relax
