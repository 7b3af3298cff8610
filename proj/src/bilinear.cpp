#include "relax/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relax {

std::string to_string(Method m) {
  switch (m) {
    case Method::McCormickOnly: return "mccormick";
    case Method::Bin2: return "bin2";
    case Method::Bin3: return "bin3";
    case Method::HybS: return "hybs";
    case Method::NMDT: return "nmdt";
    case Method::TNMDT: return "tnmdt";
    case Method::DNMDT: return "dnmdt";
    case Method::TDNMDT: return "tdnmdt";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  std::string t;
  for (char c : s)
    if (c != '-' && c != '_') t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (Method m : all_methods())
    if (to_string(m) == t) return m;
  if (t == "mccormickonly" || t == "mc") return Method::McCormickOnly;
  throw std::invalid_argument("unknown method '" + s + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> v{Method::McCormickOnly, Method::Bin2,  Method::Bin3,  Method::HybS,
                                     Method::NMDT,          Method::TNMDT, Method::DNMDT, Method::TDNMDT};
  return v;
}

bool is_separable(Method m) { return m == Method::Bin2 || m == Method::Bin3 || m == Method::HybS; }
bool is_nmdt_family(Method m) {
  return m == Method::NMDT || m == Method::TNMDT || m == Method::DNMDT || m == Method::TDNMDT;
}
bool needs_L1(Method m) { return is_separable(m) || m == Method::TNMDT || m == Method::TDNMDT; }

int RelaxationConfig::default_L1(int L) { return std::max(2, (3 * L + 1) / 2); }

void RelaxationConfig::validate() const {
  if (L < 0) throw std::invalid_argument("L must be nonnegative");
  if (L > 30) throw std::invalid_argument("L too large");
  if (needs_L1(method) && l1() < L) throw std::invalid_argument("L1 < L: lower-bounding depth must be at least L");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0,1]");
  if (nmdt_side < -1 || nmdt_side > 1) throw std::invalid_argument("nmdt_side must be -1, 0 or 1");
}

// ---------------------------------------------------------------------------------------------

namespace {

Rational R(double v) { return to_rational(v); }

Rational hat_value(const Rational& x, const Interval& b) { return (x - R(b.lo)) / (R(b.hi) - R(b.lo)); }

/// Cell index of a unit-box value on the 2^-L grid (the last cell owns xhat = 1).
long cell_of(const Rational& xh, int L) {
  const long k = floor_int(Rational(xh * pow2<Rational>(L)));
  return std::min<long>(k, (1L << L) - 1);
}

}  // namespace

void emit_mccormick_expr(MilpModel& m, const LinExpr& a, Interval ba, const LinExpr& b, Interval bb,
                         const LinExpr& z, const std::string& prefix, bool lower, bool upper) {
  if (!std::isfinite(ba.lo) || !std::isfinite(ba.hi) || !std::isfinite(bb.lo) || !std::isfinite(bb.hi))
    throw std::invalid_argument("McCormick envelope needs finite bounds");
  if (lower) {
    m.add_row(z, Sense::Ge, ba.lo * b + bb.lo * a - LinExpr(ba.lo * bb.lo), prefix + "_lo1");
    m.add_row(z, Sense::Ge, ba.hi * b + bb.hi * a - LinExpr(ba.hi * bb.hi), prefix + "_lo2");
  }
  if (upper) {
    m.add_row(z, Sense::Le, ba.hi * b + bb.lo * a - LinExpr(ba.hi * bb.lo), prefix + "_up1");
    m.add_row(z, Sense::Le, ba.lo * b + bb.hi * a - LinExpr(ba.lo * bb.hi), prefix + "_up2");
  }
}

void emit_mccormick(MilpModel& m, VarId x, VarId y, VarId z) {
  const auto& vx = m.vars.at(x);
  const auto& vy = m.vars.at(y);
  emit_mccormick_expr(m, LinExpr::var(x), {vx.lb, vx.ub}, LinExpr::var(y), {vy.lb, vy.ub}, LinExpr::var(z),
                      "mc_" + vx.name + "_" + vy.name);
}

void emit_mccormick_square(MilpModel& m, const LinExpr& x, Interval bx, const LinExpr& z, const std::string& prefix,
                           bool lower, bool upper) {
  if (!std::isfinite(bx.lo) || !std::isfinite(bx.hi)) throw std::invalid_argument("McCormick envelope needs finite bounds");
  if (lower) {
    m.add_row(z, Sense::Ge, (2 * bx.lo) * x - LinExpr(bx.lo * bx.lo), prefix + "_lo1");
    m.add_row(z, Sense::Ge, (2 * bx.hi) * x - LinExpr(bx.hi * bx.hi), prefix + "_lo2");
  }
  if (upper) m.add_row(z, Sense::Le, (bx.lo + bx.hi) * x - LinExpr(bx.lo * bx.hi), prefix + "_up");
}

// ---------------------------------------------------------------------------------------------

TermEmitter::TermEmitter(MilpModel& m, RelaxationConfig cfg) : m_(m), cfg_(cfg) { cfg_.validate(); }

Interval TermEmitter::box(VarId v) const {
  const auto& d = m_.vars.at(v);
  if (!std::isfinite(d.lb) || !std::isfinite(d.ub) || !(d.ub > d.lb))
    throw std::invalid_argument("zero-width or infinite interval on '" + d.name + "'");
  return {d.lb, d.ub};
}

VarId TermEmitter::new_z(const std::string& nm) {
  return m_.add_var(nm, -kInf, kInf, VarKind::Continuous, Origin::AuxZ);
}

VarId TermEmitter::hat(VarId x) {
  auto it = hat_.find(x);
  if (it != hat_.end()) return it->second;
  const Interval b = box(x);
  const VarId h = emit_hat(m_, x, name(x));
  hat_[x] = h;
  recipes_.push_back([=](std::vector<Rational>& v) { v[h] = hat_value(v[x], b); });
  return h;
}

const Digits& TermEmitter::digits(VarId x) {
  auto it = digits_.find(x);
  if (it != digits_.end()) return it->second;
  const int L = cfg_.L;
  Digits d;
  d.hat = hat(x);
  LinExpr rhs = LinExpr::var(d.hat);
  for (int j = 1; j <= L; ++j) {
    d.beta.push_back(m_.add_binary("beta_" + name(x) + "_" + std::to_string(j), Origin::AuxBeta));
    rhs -= LinExpr::var(d.beta.back(), std::ldexp(1.0, -j));
  }
  d.delta = m_.add_var("dx_" + name(x), 0.0, std::ldexp(1.0, -L), VarKind::Continuous, Origin::AuxDelta);
  m_.add_row(LinExpr::var(d.delta), Sense::Eq, rhs, "digits_" + name(x));
  recipes_.push_back([d, L](std::vector<Rational>& v) {
    const long k = cell_of(v[d.hat], L);
    for (int j = 1; j <= L; ++j) v[d.beta[j - 1]] = (k >> (L - j)) & 1L;
    v[d.delta] = v[d.hat] - Rational(k) * pow2<Rational>(-L);
  });
  return digits_[x] = d;
}

VarId TermEmitter::tsr_square(VarId x, std::optional<VarId> z) {
  auto it = tsr_.find(x);
  if (it != tsr_.end()) {
    if (z && *z != it->second) m_.add_row(LinExpr::var(*z), Sense::Eq, LinExpr::var(it->second), "link_" + name(*z));
    return it->second;
  }
  const VarId zz = z ? *z : new_z("z_" + name(x) + "_" + name(x));
  const VarId xh = hat(x);
  const VarId zh = emit_square_hat(m_, x, zz, name(x));
  const TsrHandle h = emit_tsr_unit(m_, xh, zh, cfg_.depths(), name(x));
  tsr_[x] = zz;
  const SawtoothDepths dep = cfg_.depths();
  recipes_.push_back([=](std::vector<Rational>& v) {
    const SawtoothWitness w = sawtooth_witness(v[xh], dep);
    for (size_t j = 0; j < h.g.size(); ++j) v[h.g[j]] = w.g[j];
    for (size_t j = 0; j < h.alpha.size(); ++j) v[h.alpha[j]] = w.alpha[j];
    v[zh] = v[xh] * v[xh];
    v[zz] = v[x] * v[x];
  });
  return zz;
}

VarId TermEmitter::epigraph_square(VarId x) {
  auto it = epi_.find(x);
  if (it != epi_.end()) return it->second;
  const VarId zz = new_z("z_" + name(x) + "_" + name(x));
  const VarId xh = hat(x);
  const VarId zh = emit_square_hat(m_, x, zz, name(x));
  const EpiHandle h = emit_epigraph_unit(m_, xh, zh, cfg_.l1(), name(x));
  epi_[x] = zz;
  const int L1 = cfg_.l1();
  recipes_.push_back([=](std::vector<Rational>& v) {
    const SawtoothWitness w = sawtooth_witness(v[xh], {0, L1});
    for (size_t j = 0; j < h.g.size(); ++j) v[h.g[j]] = w.g[j];
    v[zh] = v[xh] * v[xh];
    v[zz] = v[x] * v[x];
  });
  return zz;
}

VarId TermEmitter::combo(VarId x, VarId y, int sign) {
  const auto key = std::make_tuple(x, y, sign);
  auto it = combo_.find(key);
  if (it != combo_.end()) return it->second;
  const Interval bx = box(x), by = box(y);
  const Interval bp = sign > 0 ? Interval{bx.lo + by.lo, bx.hi + by.hi} : Interval{bx.lo - by.hi, bx.hi - by.lo};
  const std::string nm = (sign > 0 ? "p_" : "m_") + name(x) + "_" + name(y);
  const VarId p = m_.add_var(nm, bp.lo, bp.hi, VarKind::Continuous, Origin::AuxP);
  m_.add_row(LinExpr::var(p), Sense::Eq, LinExpr::var(x) + LinExpr::var(y, sign), "def_" + nm);
  combo_[key] = p;
  recipes_.push_back([=](std::vector<Rational>& v) { v[p] = sign > 0 ? Rational(v[x] + v[y]) : Rational(v[x] - v[y]); });
  return p;
}

VarId TermEmitter::nmdt_discretized(VarId x, VarId y) const {
  if (cfg_.nmdt_side == 0) return x;
  if (cfg_.nmdt_side == 1) return y;
  const Interval bx = box(x), by = box(y);
  return by.width() > bx.width() ? y : x;
}

VarId TermEmitter::bilinear(VarId x, VarId y, std::optional<VarId> zopt) {
  if (x == y) return univariate(x, zopt);
  const VarId z = zopt ? *zopt : new_z("z_" + name(x) + "_" + name(y));
  box(x);
  box(y);
  switch (cfg_.method) {
    case Method::McCormickOnly: emit_mccormick(m_, x, y, z); break;
    case Method::Bin2:
    case Method::Bin3:
    case Method::HybS: emit_separable(x, y, z); break;
    case Method::NMDT:
    case Method::TNMDT: emit_nmdt(x, y, z); break;
    case Method::DNMDT:
    case Method::TDNMDT: emit_dnmdt(x, y, z); break;
  }
  recipes_.push_back([=](std::vector<Rational>& v) { v[z] = v[x] * v[y]; });
  return z;
}

void TermEmitter::emit_separable(VarId x, VarId y, VarId z) {
  const VarId zx = tsr_square(x), zy = tsr_square(y);
  const LinExpr Z = LinExpr::var(z), ZX = LinExpr::var(zx), ZY = LinExpr::var(zy);
  const std::string tag = name(x) + "_" + name(y);
  if (cfg_.method == Method::Bin2) {
    const VarId zp = tsr_square(combo(x, y, +1));
    m_.add_row(Z, Sense::Eq, 0.5 * (LinExpr::var(zp) - ZX - ZY), "bin2_" + tag);
  } else if (cfg_.method == Method::Bin3) {
    const VarId zp = tsr_square(combo(x, y, -1));
    m_.add_row(Z, Sense::Eq, 0.5 * (ZX + ZY - LinExpr::var(zp)), "bin3_" + tag);
  } else {
    const VarId z1 = epigraph_square(combo(x, y, +1));
    const VarId z2 = epigraph_square(combo(x, y, -1));
    m_.add_row(Z, Sense::Ge, 0.5 * (LinExpr::var(z1) - ZX - ZY), "hybs_" + tag + "_lo");
    m_.add_row(Z, Sense::Le, 0.5 * (ZX + ZY - LinExpr::var(z2)), "hybs_" + tag + "_up");
  }
  if (cfg_.include_mccormick) emit_mccormick(m_, x, y, z);
}

void TermEmitter::emit_nmdt(VarId x, VarId y, VarId z) {
  const VarId d = nmdt_discretized(x, y);
  const VarId o = d == x ? y : x;
  const Interval bd = box(d), bo = box(o);
  const Digits dg = digits(d);
  const VarId oh = hat(o);
  const int L = cfg_.L;
  const double h = std::ldexp(1.0, -L);
  const std::string tag = name(d) + "_" + name(o);
  LinExpr zhat_expr;
  std::vector<VarId> u;
  for (int j = 1; j <= L; ++j) {
    u.push_back(m_.add_var("u_" + tag + "_" + std::to_string(j), -kInf, kInf, VarKind::Continuous, Origin::AuxU));
    emit_mccormick_expr(m_, LinExpr::var(dg.beta[j - 1]), {0, 1}, LinExpr::var(oh), {0, 1}, LinExpr::var(u.back()),
                        "mcb_" + tag + "_" + std::to_string(j));
    zhat_expr += LinExpr::var(u.back(), std::ldexp(1.0, -j));
  }
  const VarId dz = m_.add_var("dz_" + tag, -kInf, kInf, VarKind::Continuous, Origin::AuxDelta);
  emit_mccormick_expr(m_, LinExpr::var(dg.delta), {0, h}, LinExpr::var(oh), {0, 1}, LinExpr::var(dz), "mcd_" + tag);
  zhat_expr += LinExpr::var(dz);
  const VarId zh = m_.add_var("zhat_" + tag, -kInf, kInf, VarKind::Continuous, Origin::AuxHat);
  m_.add_row(LinExpr::var(zh), Sense::Eq, zhat_expr, "nmdt_" + tag);
  const double ld = bd.width(), lo = bo.width();
  m_.add_row(LinExpr::var(z), Sense::Eq,
             LinExpr::var(zh, ld * lo) + LinExpr::var(dg.hat, ld * bo.lo) + LinExpr::var(oh, lo * bd.lo) +
                 LinExpr(bd.lo * bo.lo),
             "zdef_" + tag);
  recipes_.push_back([=](std::vector<Rational>& v) {
    for (int j = 0; j < L; ++j) v[u[j]] = v[dg.beta[j]] * v[oh];
    v[dz] = v[dg.delta] * v[oh];
    v[zh] = v[dg.hat] * v[oh];
  });
}

void TermEmitter::emit_dnmdt(VarId x, VarId y, VarId z) {
  const Interval bx = box(x), by = box(y);
  const Digits dx = digits(x), dy = digits(y);
  const int L = cfg_.L;
  const double h = std::ldexp(1.0, -L);
  const std::string tag = name(x) + "_" + name(y);
  const VarId zh = m_.add_var("zhat_" + tag, -kInf, kInf, VarKind::Continuous, Origin::AuxHat);
  const VarId dz = m_.add_var("dz_" + tag, -kInf, kInf, VarKind::Continuous, Origin::AuxDelta);
  emit_mccormick_expr(m_, LinExpr::var(dx.delta), {0, h}, LinExpr::var(dy.delta), {0, h}, LinExpr::var(dz),
                      "mcd_" + tag);
  std::vector<double> lambdas{cfg_.lambda};
  if (cfg_.lambda == 0.5) lambdas = {0.5, 0.0, 1.0};
  struct Block {
    double lam;
    std::vector<VarId> u, v;
  };
  std::vector<Block> blocks;
  for (size_t k = 0; k < lambdas.size(); ++k) {
    const double lam = lambdas[k];
    // w_y = lam * dy + (1 - lam) * yhat,  w_x = (1 - lam) * dx + lam * xhat
    const LinExpr wy = LinExpr::var(dy.delta, lam) + LinExpr::var(dy.hat, 1 - lam);
    const LinExpr wx = LinExpr::var(dx.delta, 1 - lam) + LinExpr::var(dx.hat, lam);
    const Interval bwy{0.0, lam * h + (1 - lam)}, bwx{0.0, (1 - lam) * h + lam};
    Block b{lam, {}, {}};
    LinExpr sum = LinExpr::var(dz);
    const std::string kt = tag + "_" + std::to_string(k);
    for (int j = 1; j <= L; ++j) {
      const std::string jt = kt + "_" + std::to_string(j);
      b.u.push_back(m_.add_var("u_" + jt, -kInf, kInf, VarKind::Continuous, Origin::AuxU));
      b.v.push_back(m_.add_var("v_" + jt, -kInf, kInf, VarKind::Continuous, Origin::AuxV));
      emit_mccormick_expr(m_, LinExpr::var(dx.beta[j - 1]), {0, 1}, wy, bwy, LinExpr::var(b.u.back()), "mcu_" + jt);
      emit_mccormick_expr(m_, LinExpr::var(dy.beta[j - 1]), {0, 1}, wx, bwx, LinExpr::var(b.v.back()), "mcv_" + jt);
      sum += LinExpr::var(b.u.back(), std::ldexp(1.0, -j)) + LinExpr::var(b.v.back(), std::ldexp(1.0, -j));
    }
    m_.add_row(LinExpr::var(zh), Sense::Eq, sum, "dnmdt_" + kt);
    blocks.push_back(std::move(b));
  }
  const double lx = bx.width(), ly = by.width();
  m_.add_row(LinExpr::var(z), Sense::Eq,
             LinExpr::var(zh, lx * ly) + LinExpr::var(dx.hat, lx * by.lo) + LinExpr::var(dy.hat, ly * bx.lo) +
                 LinExpr(bx.lo * by.lo),
             "zdef_" + tag);
  recipes_.push_back([=](std::vector<Rational>& v) {
    for (const auto& b : blocks) {
      const Rational lam = R(b.lam);
      const Rational wy = lam * v[dy.delta] + (1 - lam) * v[dy.hat];
      const Rational wx = (1 - lam) * v[dx.delta] + lam * v[dx.hat];
      for (int j = 0; j < L; ++j) {
        v[b.u[j]] = v[dx.beta[j]] * wy;
        v[b.v[j]] = v[dy.beta[j]] * wx;
      }
    }
    v[dz] = v[dx.delta] * v[dy.delta];
    v[zh] = v[dx.hat] * v[dy.hat];
  });
}

VarId TermEmitter::univariate(VarId x, std::optional<VarId> zopt) {
  const Interval b = box(x);
  if (is_separable(cfg_.method)) return tsr_square(x, zopt);
  const VarId z = zopt ? *zopt : new_z("z_" + name(x) + "_" + name(x));
  if (cfg_.method == Method::McCormickOnly) {
    emit_mccormick_square(m_, LinExpr::var(x), b, LinExpr::var(z), "mcs_" + name(x));
  } else {
    emit_univariate_nmdt(x, z);
  }
  recipes_.push_back([=](std::vector<Rational>& v) { v[z] = v[x] * v[x]; });
  return z;
}

void TermEmitter::emit_univariate_nmdt(VarId x, VarId z) {
  const Digits dg = digits(x);
  const int L = cfg_.L;
  const double h = std::ldexp(1.0, -L);
  const bool dbl = cfg_.method == Method::DNMDT || cfg_.method == Method::TDNMDT;
  const std::string tag = name(x) + "_" + name(x);
  const VarId zh = emit_square_hat(m_, x, z, name(x));
  // Factor multiplied by the digits: xhat (NMDT) or delta + xhat (D-NMDT).
  const LinExpr w = dbl ? LinExpr::var(dg.delta) + LinExpr::var(dg.hat) : LinExpr::var(dg.hat);
  const Interval bw{0.0, dbl ? 1.0 + h : 1.0};
  LinExpr sum;
  std::vector<VarId> u;
  for (int j = 1; j <= L; ++j) {
    u.push_back(m_.add_var("u_" + tag + "_" + std::to_string(j), -kInf, kInf, VarKind::Continuous, Origin::AuxU));
    emit_mccormick_expr(m_, LinExpr::var(dg.beta[j - 1]), {0, 1}, w, bw, LinExpr::var(u.back()),
                        "mcb_" + tag + "_" + std::to_string(j));
    sum += LinExpr::var(u.back(), std::ldexp(1.0, -j));
  }
  const VarId dz = m_.add_var("dz_" + tag, -kInf, kInf, VarKind::Continuous, Origin::AuxDelta);
  if (dbl) {
    const bool lower = cfg_.method == Method::DNMDT;  // tightened variant drops the residual lower rows
    emit_mccormick_square(m_, LinExpr::var(dg.delta), {0, h}, LinExpr::var(dz), "mcd_" + tag, lower, true);
  } else {
    emit_mccormick_expr(m_, LinExpr::var(dg.delta), {0, h}, LinExpr::var(dg.hat), {0, 1}, LinExpr::var(dz),
                        "mcd_" + tag);
  }
  sum += LinExpr::var(dz);
  m_.add_row(LinExpr::var(zh), Sense::Eq, sum, "nmdt_" + tag);
  std::vector<VarId> gq;
  if (cfg_.method == Method::TNMDT || cfg_.method == Method::TDNMDT) {
    gq = emit_epigraph_unit(m_, dg.hat, zh, cfg_.l1(), name(x) + "_q").g;
  }
  const int L1 = cfg_.l1();
  recipes_.push_back([=](std::vector<Rational>& v) {
    const Rational wv = dbl ? Rational(v[dg.delta] + v[dg.hat]) : v[dg.hat];
    for (int j = 0; j < L; ++j) v[u[j]] = v[dg.beta[j]] * wv;
    v[dz] = dbl ? Rational(v[dg.delta] * v[dg.delta]) : Rational(v[dg.delta] * v[dg.hat]);
    v[zh] = v[dg.hat] * v[dg.hat];
    if (!gq.empty()) {
      const SawtoothWitness w = sawtooth_witness(v[dg.hat], {0, L1});
      for (size_t j = 0; j < gq.size(); ++j) v[gq[j]] = w.g[j];
    }
  });
}

std::vector<Rational> TermEmitter::witness(std::vector<Rational> values) const {
  values.resize(m_.n_vars());
  for (const auto& r : recipes_) r(values);
  return values;
}

TermEmitter::WitnessFn TermEmitter::witness_fn() const {
  const auto recipes = recipes_;
  const int n = m_.n_vars();
  return [recipes, n](std::vector<Rational> values) {
    values.resize(n);
    for (const auto& r : recipes) r(values);
    return values;
  };
}

// ---------------------------------------------------------------------------------------------

TermEmitter emit_bin2(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg) {
  cfg.method = Method::Bin2;
  TermEmitter e(m, cfg);
  e.bilinear(x, y, z);
  return e;
}
TermEmitter emit_bin3(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg) {
  cfg.method = Method::Bin3;
  TermEmitter e(m, cfg);
  e.bilinear(x, y, z);
  return e;
}
TermEmitter emit_hybs(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg) {
  cfg.method = Method::HybS;
  TermEmitter e(m, cfg);
  e.bilinear(x, y, z);
  return e;
}
TermEmitter emit_nmdt(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg) {
  if (cfg.method != Method::TNMDT) cfg.method = Method::NMDT;
  TermEmitter e(m, cfg);
  e.bilinear(x, y, z);
  return e;
}
TermEmitter emit_dnmdt(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg) {
  if (cfg.method != Method::TDNMDT) cfg.method = Method::DNMDT;
  TermEmitter e(m, cfg);
  e.bilinear(x, y, z);
  return e;
}
TermEmitter emit_univariate(MilpModel& m, VarId x, VarId z, RelaxationConfig cfg) {
  TermEmitter e(m, cfg);
  e.univariate(x, z);
  return e;
}

TermModel make_term_model(const RelaxationConfig& cfg, Interval bx, Interval by, bool square) {
  TermModel t;
  t.x = t.model.add_var("x", bx.lo, bx.hi);
  if (!square) t.y = t.model.add_var("y", by.lo, by.hi);
  t.z = t.model.add_var("z", -kInf, kInf, VarKind::Continuous, Origin::AuxZ);
  TermEmitter e(t.model, cfg);
  if (square)
    e.univariate(t.x, t.z);
  else
    e.bilinear(t.x, t.y, t.z);
  t.witness = e.witness_fn();
  return t;
}

}  // namespace relax
