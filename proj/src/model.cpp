#include "relax/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "json.hpp"

namespace relax {

using nlohmann::json;

std::string to_string(Sense s) {
  switch (s) {
    case Sense::Le: return "<=";
    case Sense::Ge: return ">=";
    case Sense::Eq: return "==";
  }
  return "?";
}

Sense parse_sense(const std::string& s) {
  if (s == "<=") return Sense::Le;
  if (s == ">=") return Sense::Ge;
  if (s == "==" || s == "=") return Sense::Eq;
  throw ModelError("", "unknown sense '" + s + "'");
}

void QuadraticForm::canonicalize() {
  std::map<std::pair<int, int>, double> acc;
  for (const auto& t : quad) {
    auto key = std::minmax(t.i, t.j);
    acc[{key.first, key.second}] += t.coef;
  }
  quad.clear();
  for (const auto& [key, coef] : acc)
    if (coef != 0.0) quad.push_back({key.first, key.second, coef});
  for (auto it = lin.begin(); it != lin.end();) {
    if (it->second == 0.0)
      it = lin.erase(it);
    else
      ++it;
  }
}

double QuadraticForm::evaluate(const std::vector<double>& x) const {
  double v = constant;
  for (const auto& [i, c] : lin) v += c * x[i];
  for (const auto& t : quad) v += t.coef * x[t.i] * x[t.j];
  return v;
}

int Miqcqp::index_of(const std::string& var) const {
  for (size_t k = 0; k < vars.size(); ++k)
    if (vars[k].name == var) return static_cast<int>(k);
  return -1;
}

int Miqcqp::n_continuous() const {
  return static_cast<int>(std::count_if(vars.begin(), vars.end(),
                                        [](const VarDecl& v) { return v.kind == VarKind::Continuous; }));
}

std::vector<int> Miqcqp::quadratic_vars() const {
  std::set<int> s;
  auto scan = [&](const QuadraticForm& f) {
    for (const auto& t : f.quad) {
      s.insert(t.i);
      s.insert(t.j);
    }
  };
  scan(objective);
  for (const auto& c : constraints) scan(c.form);
  return {s.begin(), s.end()};
}

namespace {

void validate_form(const Miqcqp& p, const QuadraticForm& f, const std::string& path) {
  const int n = static_cast<int>(p.vars.size());
  std::set<std::pair<int, int>> seen;
  for (size_t k = 0; k < f.quad.size(); ++k) {
    const auto& t = f.quad[k];
    const std::string tp = path + "/quad/" + std::to_string(k);
    if (t.i < 0 || t.j < 0 || t.i >= n || t.j >= n) throw ModelError(tp, "variable index out of range");
    if (t.i > t.j) throw ModelError(tp, "quadratic entry not in upper-triangular storage");
    if (!seen.insert({t.i, t.j}).second) throw ModelError(tp, "duplicate quadratic entry");
    if (!std::isfinite(t.coef)) throw ModelError(tp, "non-finite coefficient");
    for (int v : {t.i, t.j}) {
      const auto& d = p.vars[v];
      if (d.kind != VarKind::Continuous)
        throw ModelError(tp, "quadratic term on non-continuous variable '" + d.name + "'");
      if (!std::isfinite(d.lb) || !std::isfinite(d.ub))
        throw ModelError(tp, "infinite bound on quadratic variable '" + d.name + "'");
    }
  }
  for (const auto& [i, c] : f.lin) {
    if (i < 0 || i >= n) throw ModelError(path + "/lin", "variable index out of range");
    if (!std::isfinite(c)) throw ModelError(path + "/lin", "non-finite coefficient");
  }
  if (!std::isfinite(f.constant)) throw ModelError(path + "/constant", "non-finite constant");
}

}  // namespace

void Miqcqp::validate() const {
  std::set<std::string> names;
  for (size_t k = 0; k < vars.size(); ++k) {
    const auto& v = vars[k];
    const std::string vp = "/variables/" + std::to_string(k);
    if (v.name.empty()) throw ModelError(vp, "empty variable name");
    if (!names.insert(v.name).second) throw ModelError(vp, "duplicate variable name '" + v.name + "'");
    if (std::isnan(v.lb) || std::isnan(v.ub)) throw ModelError(vp, "NaN bound");
    if (v.lb > v.ub) throw ModelError(vp, "lb > ub for variable '" + v.name + "'");
    if (v.kind == VarKind::Binary && (v.lb != 0.0 || v.ub != 1.0))
      throw ModelError(vp, "binary variable '" + v.name + "' must have bounds [0,1]");
  }
  validate_form(*this, objective, "/objective");
  for (size_t k = 0; k < constraints.size(); ++k) {
    validate_form(*this, constraints[k].form, "/constraints/" + std::to_string(k) + "/form");
    if (!std::isfinite(constraints[k].rhs))
      throw ModelError("/constraints/" + std::to_string(k) + "/rhs", "non-finite rhs");
  }
}

double density(const QuadraticForm& form, int n) {
  if (n < 1) throw std::invalid_argument("density requires n >= 1");
  long nnz = 0;
  for (const auto& t : form.quad) {
    if (t.coef == 0.0) continue;
    nnz += (t.i == t.j) ? 1 : 2;
  }
  return static_cast<double>(nnz) / (static_cast<double>(n) * n);
}

bool is_dense(const QuadraticForm& form, int n) { return density(form, n) >= 0.25; }

namespace {

double parse_bound(const json& j, const std::string& path, double dflt) {
  if (j.is_null()) return dflt;
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw ModelError(path, "bound must be a number or \"inf\"/\"-inf\"");
}

int lookup(const Miqcqp& p, const json& name, const std::string& path) {
  if (!name.is_string()) throw ModelError(path, "variable reference must be a string");
  const int k = p.index_of(name.get<std::string>());
  if (k < 0) throw ModelError(path, "unknown variable '" + name.get<std::string>() + "'");
  return k;
}

QuadraticForm parse_form(const Miqcqp& p, const json& j, const std::string& path) {
  QuadraticForm f;
  if (j.is_null()) return f;
  if (!j.is_object()) throw ModelError(path, "form must be an object");
  if (j.contains("quad")) {
    const auto& q = j.at("quad");
    if (!q.is_array()) throw ModelError(path + "/quad", "must be an array");
    for (size_t k = 0; k < q.size(); ++k) {
      const std::string tp = path + "/quad/" + std::to_string(k);
      const auto& e = q[k];
      if (!e.is_array() || e.size() != 3 || !e[2].is_number())
        throw ModelError(tp, "quadratic entry must be [var, var, coef]");
      f.quad.push_back({lookup(p, e[0], tp + "/0"), lookup(p, e[1], tp + "/1"), e[2].get<double>()});
    }
  }
  if (j.contains("lin")) {
    const auto& l = j.at("lin");
    if (!l.is_object()) throw ModelError(path + "/lin", "must be an object");
    for (const auto& [name, coef] : l.items()) {
      if (!coef.is_number()) throw ModelError(path + "/lin/" + name, "coefficient must be a number");
      f.lin[lookup(p, json(name), path + "/lin/" + name)] += coef.get<double>();
    }
  }
  if (j.contains("constant")) {
    if (!j.at("constant").is_number()) throw ModelError(path + "/constant", "must be a number");
    f.constant = j.at("constant").get<double>();
  }
  f.canonicalize();
  return f;
}

json form_to_json(const Miqcqp& p, const QuadraticForm& f) {
  json q = json::array();
  for (const auto& t : f.quad) q.push_back({p.vars[t.i].name, p.vars[t.j].name, t.coef});
  json l = json::object();
  for (const auto& [i, c] : f.lin) l[p.vars[i].name] = c;
  return {{"quad", q}, {"lin", l}, {"constant", f.constant}};
}

json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

Miqcqp parse_instance(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("", "instance must be a JSON object");
  Miqcqp p;
  p.name = doc.value("name", std::string("instance"));
  if (!doc.contains("variables") || !doc.at("variables").is_array())
    throw ModelError("/variables", "missing variables array");
  const auto& vs = doc.at("variables");
  for (size_t k = 0; k < vs.size(); ++k) {
    const std::string vp = "/variables/" + std::to_string(k);
    const auto& v = vs[k];
    if (!v.is_object() || !v.contains("name") || !v.at("name").is_string())
      throw ModelError(vp, "variable needs a string name");
    VarDecl d;
    d.name = v.at("name").get<std::string>();
    const std::string kind = v.value("kind", std::string("continuous"));
    if (kind == "continuous")
      d.kind = VarKind::Continuous;
    else if (kind == "binary")
      d.kind = VarKind::Binary;
    else
      throw ModelError(vp + "/kind", "unknown kind '" + kind + "'");
    const double dlb = d.kind == VarKind::Binary ? 0.0 : -std::numeric_limits<double>::infinity();
    const double dub = d.kind == VarKind::Binary ? 1.0 : std::numeric_limits<double>::infinity();
    d.lb = parse_bound(v.contains("lb") ? v.at("lb") : json(), vp + "/lb", dlb);
    d.ub = parse_bound(v.contains("ub") ? v.at("ub") : json(), vp + "/ub", dub);
    p.vars.push_back(d);
  }
  p.objective = parse_form(p, doc.contains("objective") ? doc.at("objective") : json(), "/objective");
  if (doc.contains("constraints")) {
    const auto& cs = doc.at("constraints");
    if (!cs.is_array()) throw ModelError("/constraints", "must be an array");
    for (size_t k = 0; k < cs.size(); ++k) {
      const std::string cp = "/constraints/" + std::to_string(k);
      const auto& c = cs[k];
      if (!c.is_object()) throw ModelError(cp, "constraint must be an object");
      Constraint con;
      con.form = parse_form(p, c.contains("form") ? c.at("form") : json(), cp + "/form");
      try {
        con.sense = parse_sense(c.value("sense", std::string("<=")));
      } catch (const ModelError& e) {
        throw ModelError(cp + "/sense", e.what());
      }
      const auto rhs = c.contains("rhs") ? c.at("rhs") : json(0.0);
      if (!rhs.is_number()) throw ModelError(cp + "/rhs", "must be a number");
      con.rhs = rhs.get<double>();
      p.constraints.push_back(std::move(con));
    }
  }
  p.validate();
  return p;
}

std::string serialize_instance(const Miqcqp& p) {
  json doc;
  doc["name"] = p.name;
  json vs = json::array();
  for (const auto& v : p.vars) {
    json jv = {{"name", v.name}, {"lb", bound_to_json(v.lb)}, {"ub", bound_to_json(v.ub)}};
    jv["kind"] = v.kind == VarKind::Binary ? "binary" : "continuous";
    vs.push_back(jv);
  }
  doc["variables"] = vs;
  doc["objective"] = form_to_json(p, p.objective);
  json cs = json::array();
  for (const auto& c : p.constraints)
    cs.push_back({{"form", form_to_json(p, c.form)}, {"sense", to_string(c.sense)}, {"rhs", c.rhs}});
  doc["constraints"] = cs;
  return doc.dump(2);
}

Miqcqp random_boxqp(int n, double density, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_boxqp: n must be positive");
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("random_boxqp: density must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-50, 50);
  std::bernoulli_distribution keep(density);
  Miqcqp p;
  p.name = "boxqp_n" + std::to_string(n) + "_s" + std::to_string(seed);
  for (int i = 0; i < n; ++i) p.vars.push_back({"x" + std::to_string(i + 1), 0.0, 1.0, VarKind::Continuous});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const int c = coef(rng);
      if (keep(rng)) p.objective.quad.push_back({i, j, static_cast<double>(c == 0 ? 1 : c)});
    }
  for (int i = 0; i < n; ++i) {
    const int c = coef(rng);
    if (c != 0) p.objective.lin[i] = c;
  }
  p.objective.canonicalize();
  return p;
}

}  // namespace relax
