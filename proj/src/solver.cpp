#include "relax/solver.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "simplex.hpp"

namespace relax {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

template <class T>
T convert(double v) {
  if constexpr (std::is_same_v<T, Rational>)
    return to_rational(v);
  else
    return v;
}

template <class T>
detail::LpData<T> build_lp(const MilpModel& m, const std::map<VarId, int>& fixings) {
  detail::LpData<T> lp;
  lp.n = m.n_vars();
  lp.lb.resize(lp.n);
  lp.ub.resize(lp.n);
  lp.has_lb.assign(lp.n, 0);
  lp.has_ub.assign(lp.n, 0);
  lp.cost.assign(lp.n, T(0));
  for (int k = 0; k < lp.n; ++k) {
    double lo = m.vars[k].lb, hi = m.vars[k].ub;
    auto f = fixings.find(k);
    if (f != fixings.end()) {
      if (f->second != 0 && f->second != 1) throw SolverError("fixing values must be 0 or 1");
      lo = hi = f->second;
    }
    if (std::isnan(lo) || std::isnan(hi)) throw SolverError("NaN bound on '" + m.vars[k].name + "'");
    if (!std::isinf(lo)) {
      lp.lb[k] = convert<T>(lo);
      lp.has_lb[k] = 1;
    }
    if (!std::isinf(hi)) {
      lp.ub[k] = convert<T>(hi);
      lp.has_ub[k] = 1;
    }
  }
  const T sign(m.direction == Direction::Minimize ? 1 : -1);
  for (const auto& [v, c] : m.objective) {
    if (!std::isfinite(c)) throw SolverError("non-finite objective coefficient");
    lp.cost[v] = sign * convert<T>(c);
  }
  for (const auto& r : m.rows) {
    std::vector<std::pair<int, T>> coefs;
    for (const auto& [v, c] : r.coefs) {
      if (!std::isfinite(c)) throw SolverError("non-finite coefficient in row " + r.name);
      coefs.push_back({v, convert<T>(c)});
    }
    if (!std::isfinite(r.rhs)) throw SolverError("non-finite rhs in row " + r.name);
    lp.rows.push_back(std::move(coefs));
    lp.sense.push_back(r.sense == Sense::Le ? 0 : r.sense == Sense::Ge ? 1 : 2);
    lp.rhs.push_back(convert<T>(r.rhs));
  }
  return lp;
}

template <class T>
class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& m, std::vector<int> binaries) : m_(m), bins_(std::move(binaries)) {}

  SolveResult run(const detail::LpData<T>& lp) {
    lp_ = &lp;
    detail::Simplex<T> root(lp);
    SolveResult res;
    const auto st = root.solve();
    nodes_ = 1;
    if (st == detail::LpStatus::Infeasible) return finish(res);
    if (st == detail::LpStatus::Unbounded) {
      res.status = SolveStatus::Unbounded;
      res.nodes = nodes_;
      return res;
    }
    explore(root, true);
    return finish(res);
  }

 private:
  const MilpModel& m_;
  const detail::LpData<T>* lp_ = nullptr;
  std::vector<int> bins_;
  std::vector<std::pair<int, int>> path_;  // binaries fixed on the way to the current node
  bool have_ = false;
  T best_;
  std::vector<T> best_x_;
  long nodes_ = 0;

  /// In floating point a warm-started dual simplex can drift into a false infeasibility verdict;
  /// pruning on it would cut off the optimum, so the node is re-solved from scratch first.
  bool confirm_infeasible(detail::Simplex<T>& sx) {
    if constexpr (std::is_same_v<T, double>) {
      detail::LpData<T> lp = *lp_;
      for (const auto& [k, v] : path_) {
        lp.lb[k] = lp.ub[k] = T(v);
        lp.has_lb[k] = lp.has_ub[k] = 1;
      }
      detail::Simplex<T> fresh(lp);
      if (fresh.solve() == detail::LpStatus::Optimal) {
        sx = std::move(fresh);
        return false;
      }
    }
    return true;
  }

  void explore(detail::Simplex<T>& sx, bool solved) {
    if (!solved) {
      ++nodes_;
      if (sx.reoptimize() != detail::LpStatus::Optimal && confirm_infeasible(sx)) return;
    }
    const T obj = sx.objective();
    if (have_ && !(obj < best_)) return;
    if constexpr (std::is_same_v<T, double>) {
      if (have_ && obj >= best_ - 1e-12 * std::max(1.0, std::abs(best_))) return;
    }
    for (int k : bins_) {
      if (detail::Num<T>::integral(sx.value(k))) continue;
      {
        detail::Simplex<T> child = sx;
        child.set_bounds(k, T(0), T(0));
        path_.push_back({k, 0});
        explore(child, false);
        path_.pop_back();
      }
      sx.set_bounds(k, T(1), T(1));
      path_.push_back({k, 1});
      explore(sx, false);
      path_.pop_back();
      return;
    }
    have_ = true;
    best_ = obj;
    best_x_.resize(m_.n_vars());
    for (int k = 0; k < m_.n_vars(); ++k) best_x_[k] = sx.value(k);
  }

  SolveResult finish(SolveResult& res) {
    res.nodes = nodes_;
    if (!have_) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
    res.status = SolveStatus::Optimal;
    const bool maximize = m_.direction == Direction::Maximize;
    T obj = maximize ? T(-best_) : best_;
    if constexpr (std::is_same_v<T, Rational>) {
      obj += to_rational(m_.objective_constant);
      res.exact_objective = obj;
      res.objective = obj.get_d();
      res.exact_values = best_x_;
      for (const auto& v : best_x_) res.values.push_back(v.get_d());
    } else {
      res.objective = obj + m_.objective_constant;
      res.values = best_x_;
      for (int k : bins_) res.values[k] = std::round(res.values[k]);
    }
    return res;
  }
};

}  // namespace

SolveResult solve_builtin(const MilpModel& model, const std::map<VarId, int>& fixings, const SolveOptions& opts) {
  model.validate();
  std::vector<int> bins;
  for (int k = 0; k < model.n_vars(); ++k)
    if (model.vars[k].kind == VarKind::Binary && !fixings.count(k)) bins.push_back(k);
  if (static_cast<int>(bins.size()) > opts.max_binaries)
    throw SolverError("size limit exceeded: " + std::to_string(bins.size()) + " free binaries > " +
                      std::to_string(opts.max_binaries));
  if (opts.arithmetic == Arithmetic::Exact) {
    BranchAndBound<Rational> bb(model, bins);
    return bb.run(build_lp<Rational>(model, fixings));
  }
  BranchAndBound<double> bb(model, bins);
  return bb.run(build_lp<double>(model, fixings));
}

SolveResult optimize_var(const MilpModel& model, VarId v, Direction dir, const std::map<VarId, int>& fixings,
                         const SolveOptions& opts) {
  MilpModel m = model;
  m.set_objective(LinExpr::var(v), dir);
  return solve_builtin(m, fixings, opts);
}

std::vector<double> parse_solution(const MilpModel& model, const std::string& text) {
  std::vector<double> x(model.n_vars(), 0.0);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name, val, extra;
    if (!(ls >> name)) continue;
    if (!(ls >> val) || (ls >> extra))
      throw SolverError("unparsable solution line " + std::to_string(lineno) + ": '" + line + "'");
    const VarId v = model.find(name);
    if (v < 0) throw SolverError("solution names unknown variable '" + name + "'");
    char* end = nullptr;
    const double d = std::strtod(val.c_str(), &end);
    if (end == val.c_str() || *end != '\0' || !std::isfinite(d))
      throw SolverError("unparsable value on solution line " + std::to_string(lineno));
    x[v] = d;
  }
  return x;
}

SolveResult solve_external(const MilpModel& model, const std::string& cmd_template) {
  if (cmd_template.find("{mps}") == std::string::npos || cmd_template.find("{sol}") == std::string::npos)
    throw SolverError("configuration error: solver command template needs {mps} and {sol} placeholders");
  namespace fs = std::filesystem;
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("relax_ext_" + std::to_string(rd()));
  fs::create_directories(dir);
  const fs::path mps = dir / "model.mps", sol = dir / "model.sol";
  {
    std::ofstream out(mps);
    out << write_mps(model);
  }
  std::string cmd = cmd_template;
  auto replace_all = [&](const std::string& key, const std::string& val) {
    for (size_t p = cmd.find(key); p != std::string::npos; p = cmd.find(key, p + val.size()))
      cmd.replace(p, key.size(), val);
  };
  replace_all("{mps}", mps.string());
  replace_all("{sol}", sol.string());
  const int rc = std::system(cmd.c_str());
  auto cleanup = [&] {
    std::error_code ec;
    fs::remove_all(dir, ec);
  };
  if (rc != 0) {
    cleanup();
    throw SolverError("external solver exited with status " + std::to_string(rc));
  }
  std::ifstream in(sol);
  if (!in) {
    cleanup();
    throw SolverError("external solver produced no solution file");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  cleanup();
  SolveResult res;
  res.values = parse_solution(model, buf.str());
  if (model.max_violation(res.values) > 1e-6) throw SolverError("external solution rejected");
  for (int k = 0; k < model.n_vars(); ++k)
    if (model.vars[k].kind == VarKind::Binary && std::abs(res.values[k] - std::round(res.values[k])) > 1e-6)
      throw SolverError("external solution rejected: fractional binary '" + model.vars[k].name + "'");
  res.status = SolveStatus::Optimal;
  res.objective = model.objective_constant;
  for (const auto& [v, c] : model.objective) res.objective += c * res.values[v];
  return res;
}

}  // namespace relax
