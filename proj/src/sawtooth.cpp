#include "relax/sawtooth.hpp"

#include <cmath>

namespace relax {

namespace {

std::string nm(const std::string& kind, const std::string& prefix, int k) {
  return kind + "_" + prefix + "_" + std::to_string(k);
}

Interval box_of(const MilpModel& m, VarId x) {
  const auto& v = m.vars.at(x);
  if (!std::isfinite(v.lb) || !std::isfinite(v.ub) || !(v.ub > v.lb))
    throw std::invalid_argument("zero-width or infinite interval on '" + v.name + "'");
  return {v.lb, v.ub};
}

}  // namespace

void check_depths(SawtoothDepths d) {
  if (d.L < 0 || d.L1 < 0) throw std::invalid_argument("depths must be nonnegative");
  if (d.L1 < d.L) throw std::invalid_argument("L1 < L: lower-bounding depth must be at least L");
}

SBlock emit_S(MilpModel& m, VarId xhat, int L, const std::string& prefix) {
  SBlock b;
  b.g.push_back(m.add_var(nm("g", prefix, 0), 0.0, 1.0, VarKind::Continuous, Origin::AuxG));
  m.add_row(LinExpr::var(b.g[0]), Sense::Eq, LinExpr::var(xhat), "S_" + prefix + "_0");
  for (int j = 1; j <= L; ++j) {
    const VarId g = m.add_var(nm("g", prefix, j), 0.0, 1.0, VarKind::Continuous, Origin::AuxG);
    const VarId a = m.add_binary(nm("alpha", prefix, j), Origin::AuxAlpha);
    const LinExpr gj = LinExpr::var(g), gp = LinExpr::var(b.g.back()), aj = LinExpr::var(a);
    const std::string r = "S_" + prefix + "_" + std::to_string(j);
    m.add_row(gj, Sense::Ge, 2.0 * (gp - aj), r + "a");
    m.add_row(gj, Sense::Le, 2.0 * gp, r + "b");
    m.add_row(gj, Sense::Ge, 2.0 * (aj - gp), r + "c");
    m.add_row(gj, Sense::Le, 2.0 * (LinExpr(1.0) - gp), r + "d");
    b.g.push_back(g);
    b.alpha.push_back(a);
  }
  return b;
}

void extend_T(MilpModel& m, std::vector<VarId>& g, int L1, const std::string& prefix) {
  for (int j = static_cast<int>(g.size()); j <= L1; ++j) {
    const VarId v = m.add_var(nm("g", prefix, j), 0.0, 1.0, VarKind::Continuous, Origin::AuxG);
    const LinExpr gj = LinExpr::var(v), gp = LinExpr::var(g.back());
    const std::string r = "T_" + prefix + "_" + std::to_string(j);
    m.add_row(gj, Sense::Le, 2.0 * gp, r + "a");
    m.add_row(gj, Sense::Le, 2.0 * (LinExpr(1.0) - gp), r + "b");
    g.push_back(v);
  }
}

std::vector<VarId> emit_T(MilpModel& m, VarId xhat, int L1, const std::string& prefix) {
  std::vector<VarId> g{m.add_var(nm("g", prefix, 0), 0.0, 1.0, VarKind::Continuous, Origin::AuxG)};
  m.add_row(LinExpr::var(g[0]), Sense::Eq, LinExpr::var(xhat), "T_" + prefix + "_0");
  extend_T(m, g, L1, prefix);
  return g;
}

void emit_epigraph_cuts(MilpModel& m, VarId xhat, VarId zhat, const std::vector<VarId>& g, int depth,
                        const std::string& prefix) {
  const LinExpr z = LinExpr::var(zhat), x = LinExpr::var(xhat);
  LinExpr f = x;  // f^j(x, g) = x - sum_{i<=j} 2^{-2i} g_i
  for (int j = 0; j <= depth; ++j) {
    if (j > 0) f -= LinExpr::var(g.at(j), std::ldexp(1.0, -2 * j));
    m.add_row(z, Sense::Ge, f - LinExpr(std::ldexp(1.0, -2 * j - 2)), "Q_" + prefix + "_" + std::to_string(j));
  }
  m.add_row(z, Sense::Ge, LinExpr(0.0), "Q_" + prefix + "_nn");
  m.add_row(z, Sense::Ge, 2.0 * x - LinExpr(1.0), "Q_" + prefix + "_end");
}

VarId emit_hat(MilpModel& m, VarId x, const std::string& prefix_in) {
  const std::string prefix = prefix_in;
  const Interval b = box_of(m, x);
  const VarId h = m.add_var("xhat_" + prefix, 0.0, 1.0, VarKind::Continuous, Origin::AuxHat);
  m.add_row(LinExpr::var(x), Sense::Eq, LinExpr(b.lo) + LinExpr::var(h, b.width()), "hat_" + prefix);
  return h;
}

VarId emit_square_hat(MilpModel& m, VarId x, VarId z, const std::string& prefix_in) {
  const std::string prefix = prefix_in;
  const Interval b = box_of(m, x);
  const VarId zh = m.add_var("zhat_" + prefix, -kInf, kInf, VarKind::Continuous, Origin::AuxHat);
  const double l = b.width();
  m.add_row(LinExpr::var(z), Sense::Eq,
            LinExpr::var(zh, l * l) + LinExpr::var(x, 2.0 * b.lo) - LinExpr(b.lo * b.lo), "zhat_" + prefix);
  return zh;
}

TsrHandle emit_tsr_unit(MilpModel& m, VarId xhat, VarId zhat, SawtoothDepths d, const std::string& prefix) {
  check_depths(d);
  TsrHandle h;
  h.xhat = xhat;
  h.zhat = zhat;
  h.depths = d;
  SBlock s = emit_S(m, xhat, d.L, prefix);
  h.g = s.g;
  h.alpha = s.alpha;
  extend_T(m, h.g, d.L1, prefix);
  LinExpr f = LinExpr::var(xhat);
  for (int j = 1; j <= d.L; ++j) f -= LinExpr::var(h.g[j], std::ldexp(1.0, -2 * j));
  m.add_row(LinExpr::var(zhat), Sense::Le, f, "R_" + prefix + "_up");
  emit_epigraph_cuts(m, xhat, zhat, h.g, d.L1, prefix);
  return h;
}

TsrHandle emit_tightened_sawtooth(MilpModel& m, VarId x, VarId z, SawtoothDepths d, const std::string& prefix) {
  check_depths(d);
  const std::string p = prefix.empty() ? m.vars.at(x).name : prefix;
  const VarId xh = emit_hat(m, x, p);
  const VarId zh = emit_square_hat(m, x, z, p);
  TsrHandle h = emit_tsr_unit(m, xh, zh, d, p);
  h.x = x;
  h.z = z;
  return h;
}

EpiHandle emit_epigraph_unit(MilpModel& m, VarId phat, VarId zphat, int L1, const std::string& prefix) {
  if (L1 < 0) throw std::invalid_argument("depth must be nonnegative");
  EpiHandle h;
  h.phat = phat;
  h.zphat = zphat;
  h.L1 = L1;
  h.g = emit_T(m, phat, L1, prefix);
  emit_epigraph_cuts(m, phat, zphat, h.g, L1, prefix);
  return h;
}

EpiHandle emit_sawtooth_epigraph(MilpModel& m, VarId p, VarId zp, int L1, const std::string& prefix) {
  const std::string pr = prefix.empty() ? m.vars.at(p).name : prefix;
  const VarId ph = emit_hat(m, p, pr);
  const VarId zh = emit_square_hat(m, p, zp, pr);
  EpiHandle h = emit_epigraph_unit(m, ph, zh, L1, pr);
  h.p = p;
  h.zp = zp;
  return h;
}

SawtoothWitness sawtooth_witness(const Rational& xhat, SawtoothDepths d) {
  check_depths(d);
  if (xhat < 0 || xhat > 1) throw std::domain_error("sawtooth_witness: point outside its interval");
  SawtoothWitness w;
  w.g.push_back(xhat);
  for (int j = 1; j <= d.L1; ++j) {
    const Rational& prev = w.g.back();
    if (j <= d.L) w.alpha.push_back(prev > Rational(1, 2) ? 1 : 0);
    w.g.push_back(tooth_step(prev));
  }
  w.zmax = pwl_square(xhat, d.L);
  w.zmin = epi_lower(xhat, d.L1);
  return w;
}

SawtoothWitness sawtooth_witness(const Rational& x, const Interval& box, SawtoothDepths d) {
  const Rational lo = to_rational(box.lo), hi = to_rational(box.hi);
  if (!(hi > lo)) throw std::invalid_argument("zero-width or infinite interval");
  return sawtooth_witness(Rational((x - lo) / (hi - lo)), d);
}

}  // namespace relax
