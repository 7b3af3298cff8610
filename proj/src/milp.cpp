#include "relax/milp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace relax {

std::string to_string(Origin o) {
  switch (o) {
    case Origin::Original: return "original";
    case Origin::AuxG: return "aux-g";
    case Origin::AuxAlpha: return "aux-alpha";
    case Origin::AuxBeta: return "aux-beta";
    case Origin::AuxU: return "aux-u";
    case Origin::AuxV: return "aux-v";
    case Origin::AuxDelta: return "aux-delta";
    case Origin::AuxZ: return "aux-z";
    case Origin::AuxP: return "aux-p";
    case Origin::AuxHat: return "aux-hat";
  }
  return "?";
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [v, c] : o.terms) terms[v] += c;
  constant += o.constant;
  return *this;
}
LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [v, c] : o.terms) terms[v] -= c;
  constant -= o.constant;
  return *this;
}
LinExpr& LinExpr::operator*=(double s) {
  for (auto& [v, c] : terms) c *= s;
  constant *= s;
  return *this;
}
LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

VarId MilpModel::add_var(const std::string& nm, double lb, double ub, VarKind kind, Origin origin) {
  if (index_.count(nm)) throw std::invalid_argument("duplicate variable name '" + nm + "'");
  if (!(lb <= ub)) throw std::invalid_argument("variable '" + nm + "' has lb > ub");
  const VarId id = n_vars();
  vars.push_back({nm, lb, ub, kind, origin});
  index_[nm] = id;
  return id;
}

int MilpModel::add_row(const LinExpr& lhs, Sense sense, const LinExpr& rhs, const std::string& nm) {
  LinExpr e = lhs - rhs;
  Row r;
  r.name = nm.empty() ? "r" + std::to_string(rows.size()) : nm;
  for (const auto& [v, c] : e.terms)
    if (c != 0.0) r.coefs[v] = c;
  r.sense = sense;
  r.rhs = -e.constant;
  rows.push_back(std::move(r));
  return n_rows() - 1;
}

void MilpModel::set_objective(const LinExpr& e, Direction dir) {
  objective.clear();
  for (const auto& [v, c] : e.terms)
    if (c != 0.0) objective[v] = c;
  objective_constant = e.constant;
  direction = dir;
}

int MilpModel::n_binaries() const {
  return static_cast<int>(
      std::count_if(vars.begin(), vars.end(), [](const MilpVar& v) { return v.kind == VarKind::Binary; }));
}

VarId MilpModel::find(const std::string& nm) const {
  auto it = index_.find(nm);
  return it == index_.end() ? -1 : it->second;
}

void MilpModel::validate() const {
  for (const auto& v : vars) {
    if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub)
      throw std::invalid_argument("variable '" + v.name + "' has invalid bounds");
    if (v.kind == VarKind::Binary && (v.lb < 0 || v.ub > 1))
      throw std::invalid_argument("binary variable '" + v.name + "' outside [0,1]");
  }
  auto check = [&](const std::map<VarId, double>& m, const std::string& where) {
    for (const auto& [v, c] : m) {
      if (v < 0 || v >= n_vars()) throw std::invalid_argument(where + ": reference to undeclared variable");
      if (!std::isfinite(c)) throw std::invalid_argument(where + ": non-finite coefficient");
    }
  };
  for (const auto& r : rows) {
    check(r.coefs, "row " + r.name);
    if (!std::isfinite(r.rhs)) throw std::invalid_argument("row " + r.name + ": non-finite rhs");
  }
  check(objective, "objective");
}

double MilpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (size_t k = 0; k < vars.size(); ++k) {
    worst = std::max(worst, vars[k].lb - x[k]);
    worst = std::max(worst, x[k] - vars[k].ub);
  }
  for (const auto& r : rows) {
    double act = 0.0;
    for (const auto& [v, c] : r.coefs) act += c * x[v];
    const double d = act - r.rhs;
    if (r.sense == Sense::Le) worst = std::max(worst, d);
    if (r.sense == Sense::Ge) worst = std::max(worst, -d);
    if (r.sense == Sense::Eq) worst = std::max(worst, std::abs(d));
  }
  return worst;
}

MilpModel lp_relax(const MilpModel& m) {
  MilpModel r = m;
  for (auto& v : r.vars)
    if (v.kind == VarKind::Binary) v.kind = VarKind::Continuous;
  return r;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "1e+30" : "-1e+30";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

char sense_code(Sense s) { return s == Sense::Le ? 'L' : s == Sense::Ge ? 'G' : 'E'; }

}  // namespace

std::string write_mps(const MilpModel& m) {
  std::ostringstream os;
  os << "NAME " << m.name << "\n";
  if (m.direction == Direction::Maximize) os << "OBJSENSE\n    MAX\n";
  os << "ROWS\n N obj\n";
  for (const auto& r : m.rows) os << " " << sense_code(r.sense) << " " << r.name << "\n";
  // Column-major coefficient listing.
  std::vector<std::vector<std::pair<int, double>>> cols(m.vars.size());
  for (size_t i = 0; i < m.rows.size(); ++i)
    for (const auto& [v, c] : m.rows[i].coefs) cols[v].push_back({static_cast<int>(i), c});
  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (size_t k = 0; k < m.vars.size(); ++k) {
    const auto& v = m.vars[k];
    const bool is_bin = v.kind == VarKind::Binary;
    if (is_bin && !in_int) {
      os << "    MARKER" << marker++ << " 'MARKER' 'INTORG'\n";
      in_int = true;
    } else if (!is_bin && in_int) {
      os << "    MARKER" << marker++ << " 'MARKER' 'INTEND'\n";
      in_int = false;
    }
    auto oit = m.objective.find(static_cast<VarId>(k));
    bool any = false;
    if (oit != m.objective.end()) {
      os << "    " << v.name << " obj " << format_double(oit->second) << "\n";
      any = true;
    }
    for (const auto& [i, c] : cols[k]) {
      os << "    " << v.name << " " << m.rows[i].name << " " << format_double(c) << "\n";
      any = true;
    }
    if (!any) os << "    " << v.name << " obj 0\n";
  }
  if (in_int) os << "    MARKER" << marker++ << " 'MARKER' 'INTEND'\n";
  os << "RHS\n";
  for (const auto& r : m.rows)
    if (r.rhs != 0.0) os << "    rhs " << r.name << " " << format_double(r.rhs) << "\n";
  if (m.objective_constant != 0.0) os << "    rhs obj " << format_double(-m.objective_constant) << "\n";
  os << "BOUNDS\n";
  for (const auto& v : m.vars) {
    if (v.kind == VarKind::Binary && v.lb == 0.0 && v.ub == 1.0) {
      os << " BV bnd " << v.name << "\n";
      continue;
    }
    if (std::isinf(v.lb) && std::isinf(v.ub)) {
      os << " FR bnd " << v.name << "\n";
      continue;
    }
    if (v.lb == v.ub) {
      os << " FX bnd " << v.name << " " << format_double(v.lb) << "\n";
      continue;
    }
    if (std::isinf(v.lb))
      os << " MI bnd " << v.name << "\n";
    else if (v.lb != 0.0)
      os << " LO bnd " << v.name << " " << format_double(v.lb) << "\n";
    if (std::isinf(v.ub)) {
      if (!std::isinf(v.lb) && v.lb != 0.0) os << " PL bnd " << v.name << "\n";
    } else {
      os << " UP bnd " << v.name << " " << format_double(v.ub) << "\n";
    }
  }
  os << "ENDATA\n";
  return os.str();
}

namespace {

double parse_num(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
  if (v >= 1e30) return kInf;
  if (v <= -1e30) return -kInf;
  return v;
}

}  // namespace

MilpModel read_mps(const std::string& text) {
  MilpModel m;
  std::istringstream in(text);
  std::string line, section;
  std::map<std::string, int> row_index;
  std::string obj_row;
  bool in_int = false;
  std::map<std::string, bool> lb_set;
  auto ensure_var = [&](const std::string& name) {
    VarId v = m.find(name);
    if (v >= 0) return v;
    v = m.add_var(name, 0.0, kInf, in_int ? VarKind::Binary : VarKind::Continuous);
    if (in_int) m.vars[v].ub = 1.0;
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (line[0] != ' ') {
      section = tok[0];
      if (section == "NAME" && tok.size() > 1) m.name = tok[1];
      continue;
    }
    if (section == "OBJSENSE") {
      if (tok[0] == "MAX") m.direction = Direction::Maximize;
    } else if (section == "ROWS") {
      if (tok[0] == "N") {
        obj_row = tok[1];
        continue;
      }
      Row r;
      r.name = tok[1];
      r.sense = tok[0] == "L" ? Sense::Le : tok[0] == "G" ? Sense::Ge : Sense::Eq;
      row_index[r.name] = m.n_rows();
      m.rows.push_back(r);
    } else if (section == "COLUMNS") {
      if (tok.size() >= 3 && tok[1] == "'MARKER'") {
        in_int = tok[2] == "'INTORG'";
        continue;
      }
      const VarId v = ensure_var(tok[0]);
      for (size_t k = 1; k + 1 < tok.size(); k += 2) {
        const double c = parse_num(tok[k + 1]);
        if (tok[k] == obj_row) {
          if (c != 0.0) m.objective[v] = c;
        } else {
          m.rows.at(row_index.at(tok[k])).coefs[v] = c;
        }
      }
    } else if (section == "RHS") {
      for (size_t k = 1; k + 1 < tok.size(); k += 2) {
        const double c = parse_num(tok[k + 1]);
        if (tok[k] == obj_row)
          m.objective_constant = -c;
        else
          m.rows.at(row_index.at(tok[k])).rhs = c;
      }
    } else if (section == "BOUNDS") {
      const std::string& type = tok[0];
      const VarId v = m.find(tok[2]);
      if (v < 0) throw std::invalid_argument("bound on unknown column '" + tok[2] + "'");
      auto& var = m.vars[v];
      if (type == "BV") {
        var.kind = VarKind::Binary;
        var.lb = 0.0;
        var.ub = 1.0;
      } else if (type == "FR") {
        var.lb = -kInf;
        var.ub = kInf;
      } else if (type == "MI") {
        var.lb = -kInf;
      } else if (type == "PL") {
        var.ub = kInf;
      } else if (type == "FX") {
        var.lb = var.ub = parse_num(tok[3]);
      } else if (type == "LO") {
        var.lb = parse_num(tok[3]);
      } else if (type == "UP") {
        var.ub = parse_num(tok[3]);
      } else {
        throw std::invalid_argument("unsupported bound type '" + type + "'");
      }
    }
  }
  return m;
}

std::string write_lp_debug(const MilpModel& m) {
  std::ostringstream os;
  auto expr = [&](const std::map<VarId, double>& t) {
    bool first = true;
    for (const auto& [v, c] : t) {
      os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ")) << format_double(std::abs(c)) << " "
         << m.vars[v].name;
      first = false;
    }
    if (first) os << "0";
  };
  os << (m.direction == Direction::Minimize ? "minimize\n  " : "maximize\n  ");
  expr(m.objective);
  if (m.objective_constant != 0.0) os << " + " << format_double(m.objective_constant);
  os << "\nsubject to\n";
  for (const auto& r : m.rows) {
    os << "  " << r.name << ": ";
    expr(r.coefs);
    os << " " << to_string(r.sense) << " " << format_double(r.rhs) << "\n";
  }
  os << "bounds\n";
  for (const auto& v : m.vars)
    os << "  " << format_double(v.lb) << " <= " << v.name << " <= " << format_double(v.ub)
       << (v.kind == VarKind::Binary ? "  (binary)" : "") << "  [" << to_string(v.origin) << "]\n";
  os << "end\n";
  return os.str();
}

}  // namespace relax
