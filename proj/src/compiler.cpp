#include "relax/compiler.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace relax {

namespace {

/// Linear image of a quadratic form: fixed factors are folded into coefficients, every remaining
/// product is replaced by its term variable (created on first use).
LinExpr linearize(const QuadraticForm& f, const Miqcqp& prob, TermEmitter& em, TermMap& tm, RelaxationReport& rep) {
  LinExpr e(f.constant);
  for (const auto& [i, c] : f.lin) e += LinExpr::var(tm.var_of[i], c);
  for (const auto& t : f.quad) {
    const VarDecl& a = prob.vars[t.i];
    const VarDecl& b = prob.vars[t.j];
    if (a.fixed() && b.fixed()) {
      e += LinExpr(t.coef * a.lb * b.lb);
    } else if (a.fixed()) {
      e += LinExpr::var(tm.var_of[t.j], t.coef * a.lb);
    } else if (b.fixed()) {
      e += LinExpr::var(tm.var_of[t.i], t.coef * b.lb);
    } else {
      const auto key = std::make_pair(t.i, t.j);
      auto it = tm.z.find(key);
      if (it == tm.z.end()) {
        const VarId z = t.i == t.j ? em.univariate(tm.var_of[t.i]) : em.bilinear(tm.var_of[t.i], tm.var_of[t.j]);
        it = tm.z.emplace(key, z).first;
        ++(t.i == t.j ? rep.n_square_terms : rep.n_bilinear_terms);
      }
      e += LinExpr::var(it->second, t.coef);
    }
  }
  return e;
}

}  // namespace

Relaxation relax_problem(const Miqcqp& prob, const RelaxationConfig& cfg) {
  prob.validate();
  cfg.validate();
  Relaxation out;
  MilpModel& m = out.model;
  m.name = prob.name.empty() ? "relaxation" : prob.name;
  TermMap& tm = out.terms;
  RelaxationReport& rep = out.report;
  for (const auto& v : prob.vars) tm.var_of.push_back(m.add_var(v.name, v.lb, v.ub, v.kind, Origin::Original));

  TermEmitter em(m, cfg);
  m.set_objective(linearize(prob.objective, prob, em, tm, rep), Direction::Minimize);
  for (size_t k = 0; k < prob.constraints.size(); ++k) {
    const Constraint& c = prob.constraints[k];
    m.add_row(linearize(c.form, prob, em, tm, rep), c.sense, LinExpr(c.rhs), "c" + std::to_string(k));
  }
  for (const auto& [key, p] : em.combos()) {
    const auto& [x, y, sign] = key;
    tm.combo[{x, y, sign}] = p;  // original variables keep their ids
  }
  tm.witness = em.witness_fn();

  std::set<int> qv;
  for (const auto& [key, z] : tm.z) {
    qv.insert(key.first);
    qv.insert(key.second);
  }
  const int nq = static_cast<int>(qv.size());
  const int n = static_cast<int>(prob.vars.size());
  rep.method = to_string(cfg.method);
  rep.L = cfg.L;
  rep.L1 = cfg.l1();
  rep.lambda = cfg.lambda;
  rep.n_binaries = m.n_binaries();
  rep.n_continuous = m.n_continuous();
  rep.n_rows = m.n_rows();
  rep.n_vars = m.n_vars();
  rep.n_quadratic_vars = nq;
  rep.predicted_binaries = count_binaries(nq, cfg.method, cfg.L);
  rep.structural_binaries = structural_binaries(nq, cfg.method, cfg.L);
  if (n > 0) {
    rep.objective_dense = is_dense(prob.objective, n);
    for (const auto& c : prob.constraints) rep.constraint_dense.push_back(is_dense(c.form, n));
  }
  m.validate();
  return out;
}

double count_binaries(int n, Method method, int L) {
  if (n < 0 || L < 0) throw std::invalid_argument("count_binaries: n and L must be nonnegative");
  switch (method) {
    case Method::McCormickOnly: return 0;
    case Method::Bin2:
    case Method::Bin3: return 0.5 * (static_cast<double>(n) * n + 1) * L;
    default: return static_cast<double>(n) * L;
  }
}

long structural_binaries(int n, Method method, int L) {
  if (n < 0 || L < 0) throw std::invalid_argument("structural_binaries: n and L must be nonnegative");
  switch (method) {
    case Method::McCormickOnly: return 0;
    case Method::Bin2:
    case Method::Bin3: return static_cast<long>(n) * (n + 1) / 2 * L;
    default: return static_cast<long>(n) * L;
  }
}

std::string RelaxationReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["L"] = L;
  j["L1"] = L1;
  j["lambda"] = lambda;
  j["n_vars"] = n_vars;
  j["n_binaries"] = n_binaries;
  j["n_continuous"] = n_continuous;
  j["n_rows"] = n_rows;
  j["n_quadratic_vars"] = n_quadratic_vars;
  j["n_bilinear_terms"] = n_bilinear_terms;
  j["n_square_terms"] = n_square_terms;
  j["predicted_binaries_table"] = predicted_binaries;
  j["predicted_binaries_structural"] = structural_binaries;
  j["objective_dense"] = objective_dense;
  j["constraint_dense"] = constraint_dense;
  return j.dump(2) + "\n";
}

DualBound dual_bound(const Miqcqp& prob, const RelaxationConfig& cfg, const SolverBackend& solver) {
  const Relaxation r = relax_problem(prob, cfg);
  DualBound out;
  if (solver.kind == SolverBackend::Kind::External) {
    out.result = solve_external(r.model, solver.command);
  } else {
    SolveOptions opts;
    opts.arithmetic = solver.kind == SolverBackend::Kind::BuiltinExact ? Arithmetic::Exact : Arithmetic::Float;
    opts.max_binaries = solver.max_binaries;
    out.result = solve_builtin(r.model, {}, opts);
  }
  if (out.result.status != SolveStatus::Optimal)
    throw SolverError("relaxation is " + to_string(out.result.status));
  out.value = out.result.objective;
  return out;
}

}  // namespace relax
