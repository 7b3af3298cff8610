// relaxc: command-line front end. Subcommands relax, solve, analyze, envelope, verify and boxqp.
// Exit codes: 0 success, 2 parse / input error, 3 emit error, 4 solver error, 5 verification failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relax/analysis.hpp"
#include "relax/compiler.hpp"
#include "relax/milp.hpp"
#include "relax/model.hpp"
#include "relax/solver.hpp"
#include "relax/verify.hpp"

using namespace relax;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitEmit = 3;
constexpr int kExitSolver = 4;
constexpr int kExitVerify = 5;

/// Error carrying the exit code it maps to.
struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct Options {
  std::string method = "hybs";
  int L = 1;
  int L1 = -1;
  double lambda = 0.5;
  bool no_mccormick = false;
  std::string in, out, report;
  std::string solver = "builtin";
  std::string solver_cmd;
  int max_binaries = 24;
  int grid = 0;  // subcommand-specific default
  long samples = 100000;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool square = false;
  bool limit = false;
  bool bilinear = false;
  std::string pattern;
  std::string point;
  int n = 5;
  double density = 1.0;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CliError(kExitParse, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliError(kExitEmit, "cannot write '" + path + "'");
  f << text;
}

Method method_of(const Options& o) {
  try {
    return parse_method(o.method);
  } catch (const std::invalid_argument& e) {
    throw CliError(kExitParse, e.what());
  }
}

RelaxationConfig config_of(const Options& o) {
  RelaxationConfig cfg;
  cfg.method = method_of(o);
  cfg.L = o.L;
  cfg.L1 = o.L1;
  cfg.lambda = o.lambda;
  cfg.include_mccormick = !o.no_mccormick;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CliError(kExitEmit, e.what());
  }
  return cfg;
}

Exec exec_of(const Options& o) { return {o.jobs != 1, o.jobs > 1 ? o.jobs : 0}; }

Miqcqp load_instance(const std::string& path) {
  if (path.empty()) throw CliError(kExitParse, "--in is required");
  try {
    return parse_instance(read_file(path));
  } catch (const ModelError& e) {
    throw CliError(kExitParse, e.what());
  }
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------------------------

int cmd_relax(const Options& o) {
  const Miqcqp prob = load_instance(o.in);
  const RelaxationConfig cfg = config_of(o);
  Relaxation r;
  try {
    r = relax_problem(prob, cfg);
  } catch (const ModelError& e) {
    throw CliError(kExitEmit, e.what());
  } catch (const std::invalid_argument& e) {
    throw CliError(kExitEmit, e.what());
  }
  const std::string out = o.out.empty() ? "model.mps" : o.out;
  write_output(out, write_mps(r.model));
  std::string report = o.report;
  if (report.empty()) {
    const auto slash = out.find_last_of('/');
    report = (slash == std::string::npos ? std::string() : out.substr(0, slash + 1)) + "report.json";
  }
  write_output(report, r.report.to_json());
  std::cout << "binaries " << r.report.n_binaries << "\ncontinuous " << r.report.n_continuous << "\nrows "
            << r.report.n_rows << "\n";
  return 0;
}

int cmd_solve(const Options& o) {
  const Miqcqp prob = load_instance(o.in);
  const RelaxationConfig cfg = config_of(o);
  SolverBackend backend;
  backend.max_binaries = o.max_binaries;
  if (o.solver == "builtin") {
    backend.kind = SolverBackend::Kind::BuiltinFloat;
  } else if (o.solver == "builtin-exact") {
    backend.kind = SolverBackend::Kind::BuiltinExact;
  } else if (o.solver == "external") {
    backend.kind = SolverBackend::Kind::External;
    backend.command = o.solver_cmd;
    if (backend.command.empty()) {
      const char* env = std::getenv("RELAX_SOLVER_CMD");
      if (env == nullptr) throw CliError(kExitParse, "external solver needs --solver-cmd or RELAX_SOLVER_CMD");
      backend.command = env;
    }
  } else {
    throw CliError(kExitParse, "unknown solver '" + o.solver + "'");
  }
  DualBound b;
  try {
    b = dual_bound(prob, cfg, backend);
  } catch (const SolverError& e) {
    throw CliError(kExitSolver, e.what());
  } catch (const ModelError& e) {
    throw CliError(kExitEmit, e.what());
  }
  nlohmann::ordered_json j;
  j["instance"] = prob.name;
  j["method"] = to_string(cfg.method);
  j["L"] = cfg.L;
  j["L1"] = cfg.l1();
  j["status"] = to_string(b.result.status);
  j["dual_bound"] = b.value;
  if (b.result.exact_objective) j["dual_bound_exact"] = str(*b.result.exact_objective);
  j["nodes"] = b.result.nodes;
  write_output(o.out, j.dump(2) + "\n");
  return 0;
}

int cmd_analyze(const Options& o, bool method_given, bool L_given) {
  std::vector<Method> methods;
  if (method_given)
    methods.push_back(method_of(o));
  else
    methods = {Method::Bin2, Method::Bin3, Method::HybS, Method::NMDT, Method::DNMDT};
  std::vector<int> levels;
  if (L_given)
    levels.push_back(o.L);
  else
    levels = {1, 2, 3, 4};
  const int grid = o.grid > 0 ? o.grid : 1025;
  std::ostringstream table, csv;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %2s %3s  %-22s %-12s  %-12s %-12s %-10s\n", "method", "L", "L1",
                "max (analytic)", "max (grid)", "avg (exact)", "avg (mc)", "mc se");
  table << line;
  csv << "method,L,L1,metric,analytic,empirical\n";
  for (Method m : methods)
    for (int L : levels) {
      Options oo = o;
      oo.method = to_string(m);
      oo.L = L;
      const RelaxationConfig cfg = config_of(oo);
      const ErrorReport r = error_report(cfg, grid, o.samples, o.seed, exec_of(o));
      const Rational exact = analytic_avg_error(m, L);
      std::string amax = r.analytic_max.exact() ? fmt(r.analytic_max.upper)
                                                : "[" + fmt(r.analytic_max.lower) + ", " + fmt(r.analytic_max.upper) + "]";
      std::snprintf(line, sizeof line, "%-8s %2d %3d  %-22s %-12.6g  %-12s %-12.6g %-10.2g\n", to_string(m).c_str(), L,
                    cfg.l1(), amax.c_str(), r.empirical_max, str(exact).c_str(), r.empirical_avg, r.empirical_avg_se);
      table << line;
      csv << to_string(m) << "," << L << "," << cfg.l1() << ",max," << fmt(r.analytic_max.upper) << ","
          << fmt(r.empirical_max) << "\n";
      csv << to_string(m) << "," << L << "," << cfg.l1() << ",avg," << fmt(exact.get_d()) << ","
          << fmt(r.empirical_avg) << "\n";
    }
  std::cout << table.str();
  if (!o.out.empty()) write_output(o.out, csv.str());
  return 0;
}

int cmd_envelope(const Options& o) {
  const RelaxationConfig cfg = config_of(o);
  const int n = o.grid > 0 ? o.grid : 33;
  if (n < 2) throw CliError(kExitParse, "--grid needs at least 2 points");
  EnvelopeMode mode;
  mode.limit = o.limit;
  std::ostringstream csv;
  csv << "x,y,zmin,zmax\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < (o.square ? 1 : n); ++j) {
      const double x = static_cast<double>(i) / (n - 1);
      const double y = o.square ? x : static_cast<double>(j) / (n - 1);
      const ZRange<double> r = o.square ? envelope_square<double>(cfg, {0, 1}, x, mode)
                                        : envelope_bilinear<double>(cfg, {0, 1}, {0, 1}, x, y, mode);
      csv << fmt(x) << "," << fmt(y) << "," << fmt(r.lo) << "," << (r.hi_infinite ? "inf" : fmt(r.hi)) << "\n";
    }
  write_output(o.out, csv.str());
  return 0;
}

int cmd_boxqp(const Options& o) {
  Miqcqp p;
  try {
    p = random_boxqp(o.n, o.density, o.seed);
  } catch (const std::invalid_argument& e) {
    throw CliError(kExitParse, e.what());
  }
  write_output(o.out, serialize_instance(p) + "\n");
  return 0;
}

Fixing parse_pattern(const std::string& s, int L) {
  if (static_cast<int>(s.size()) != L) throw CliError(kExitParse, "--pattern needs one of *,0,1 per level");
  Fixing f;
  for (int i = 0; i < L; ++i) {
    if (s[i] == '0' || s[i] == '1')
      f.values[i + 1] = s[i] - '0';
    else if (s[i] != '*')
      throw CliError(kExitParse, "--pattern needs one of *,0,1 per level");
  }
  return f;
}

std::vector<Rational> parse_point(const MilpModel& m, const std::string& text) {
  std::vector<Rational> v(m.n_vars(), Rational(0));
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string name, value;
    if (!(ls >> name)) continue;
    if (!(ls >> value)) throw CliError(kExitParse, "point line without value: " + name);
    const VarId id = m.find(name);
    if (id < 0) throw CliError(kExitParse, "unknown variable '" + name + "' in point");
    Rational q;
    if (value.find_first_of(".eE") != std::string::npos) {
      q = to_rational(std::stod(value));
    } else if (q.set_str(value, 10) != 0) {
      throw CliError(kExitParse, "bad value '" + value + "'");
    }
    q.canonicalize();
    v[id] = q;
  }
  return v;
}

int cmd_verify(const std::string& what, const Options& o, bool L1_given) {
  const Exec exec = exec_of(o);
  std::string json;
  bool ok = false;
  try {
    if (what == "sharpness") {
      const RelaxationConfig cfg = config_of(o);
      const int n = o.grid > 0 ? o.grid : 64;
      if (o.bilinear) {
        std::vector<std::pair<Rational, Rational>> pts;
        for (int i = 0; i <= n; ++i)
          for (int j = 0; j <= n; ++j) pts.push_back({frac(i, n), frac(j, n)});
        for (auto& [x, y] : pts) {
          x.canonicalize();
          y.canonicalize();
        }
        const SharpnessReport r = check_sharpness_bilinear(cfg, pts, exec);
        json = r.to_json();
        ok = r.sharp && r.ordering_ok;
      } else {
        const SharpnessReport r = check_sharpness(cfg, unit_grid(Rational(1, n)), exec);
        json = r.to_json();
        ok = r.sharp && r.ordering_ok;
      }
    } else if (what == "hereditary") {
      const SawtoothDepths d{o.L, L1_given ? o.L1 : o.L};
      check_depths(d);
      const std::vector<Rational> grid = unit_grid(Rational(1, o.grid > 0 ? o.grid : 64));
      const HereditaryReport r = o.pattern.empty()
                                     ? check_hereditary(d, grid, exec)
                                     : check_hereditary(d, std::vector<Fixing>{parse_pattern(o.pattern, d.L)}, grid, exec);
      json = r.to_json();
      ok = r.hereditarily_sharp;
    } else if (what == "counterexamples") {
      const CounterexampleReport r = counterexamples();
      json = r.to_json();
      ok = r.all_hold;
    } else if (what == "membership") {
      if (o.in.empty() || o.point.empty()) throw CliError(kExitParse, "membership needs --in model.mps and --point file");
      MilpModel m;
      try {
        m = read_mps(read_file(o.in));
      } catch (const std::invalid_argument& e) {
        throw CliError(kExitParse, e.what());
      }
      const MembershipReport r = check_membership(m, parse_point(m, read_file(o.point)));
      nlohmann::ordered_json j;
      j["verdict"] = r.member ? "member" : "not a member";
      j["member"] = r.member;
      j["max_violation"] = str(r.max_violation);
      j["violated"] = r.violated;
      json = j.dump(2) + "\n";
      ok = r.member;
    }
  } catch (const std::invalid_argument& e) {
    throw CliError(kExitParse, e.what());
  } catch (const SolverError& e) {
    throw CliError(kExitSolver, e.what());
  }
  write_output(o.out, json);
  return ok ? 0 : kExitVerify;
}

void add_relaxation_flags(CLI::App* c, Options& o) {
  c->add_option("--method", o.method, "relaxation method (mccormick, bin2, bin3, hybs, nmdt, tnmdt, dnmdt, tdnmdt)");
  c->add_option("--L", o.L, "discretization depth")->check(CLI::Range(0, 30));
  c->add_option("--L1", o.L1, "lower-bounding depth (default max{2, ceil(1.5 L)})");
  c->add_option("--lambda", o.lambda, "D-NMDT weight in [0, 1]")->check(CLI::Range(0.0, 1.0));
  c->add_flag("--no-mccormick", o.no_mccormick, "omit the McCormick rows of the separable methods");
}

void add_exec_flags(CLI::App* c, Options& o) {
  c->add_option("--seed", o.seed, "random seed");
  c->add_option("--jobs", o.jobs, "worker threads (1 = serial reference path, 0 = OpenMP default)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relaxc: MIP relaxations of nonconvex quadratic programs"};
  app.require_subcommand(1);
  Options o;

  auto* relax_cmd = app.add_subcommand("relax", "relax an instance and write MPS plus a JSON report");
  add_relaxation_flags(relax_cmd, o);
  relax_cmd->add_option("--in", o.in, "instance JSON")->required();
  relax_cmd->add_option("--out", o.out, "output MPS path (default model.mps)");
  relax_cmd->add_option("--report", o.report, "report JSON path (default report.json next to --out)");

  auto* solve_cmd = app.add_subcommand("solve", "dual bound of an instance from its MIP relaxation");
  add_relaxation_flags(solve_cmd, o);
  solve_cmd->add_option("--in", o.in, "instance JSON")->required();
  solve_cmd->add_option("--out", o.out, "result JSON path (default stdout)");
  solve_cmd->add_option("--solver", o.solver, "builtin, builtin-exact or external");
  solve_cmd->add_option("--solver-cmd", o.solver_cmd, "external command template with {mps} and {sol}");
  solve_cmd->add_option("--max-binaries", o.max_binaries, "builtin branching limit");

  auto* analyze_cmd = app.add_subcommand("analyze", "analytic vs empirical error table");
  add_relaxation_flags(analyze_cmd, o);
  add_exec_flags(analyze_cmd, o);
  analyze_cmd->add_option("--grid", o.grid, "grid points per axis for the maximum (default 1025)");
  analyze_cmd->add_option("--samples", o.samples, "Monte-Carlo samples (default 100000)");
  analyze_cmd->add_option("--out", o.out, "CSV output path");

  auto* env_cmd = app.add_subcommand("envelope", "CSV of the envelope z-range on a grid");
  add_relaxation_flags(env_cmd, o);
  env_cmd->add_option("--grid", o.grid, "grid points per axis (default 33)");
  env_cmd->add_flag("--square", o.square, "univariate z = x^2 relaxation");
  env_cmd->add_flag("--limit", o.limit, "exact parabola as lower part (L1 -> infinity)");
  env_cmd->add_option("--out", o.out, "CSV output path (default stdout)");

  auto* boxqp_cmd = app.add_subcommand("boxqp", "write a seeded random boxQP instance");
  boxqp_cmd->add_option("--n", o.n, "number of variables");
  boxqp_cmd->add_option("--density", o.density, "probability of a Q entry");
  boxqp_cmd->add_option("--seed", o.seed, "random seed");
  boxqp_cmd->add_option("--out", o.out, "output path (default stdout)");

  auto* verify_cmd = app.add_subcommand("verify", "exact structural checks with JSON reports");
  verify_cmd->require_subcommand(1);
  std::string verify_what;
  bool L1_given = false;
  const std::pair<const char*, const char*> verify_kinds[] = {
      {"sharpness", "LP projection equals the convex hull of the graph on a grid"},
      {"hereditary", "sharpness under every partial fixing of the digit binaries"},
      {"counterexamples", "exact values of the non-sharpness witnesses"},
      {"membership", "whether a point satisfies an MPS model exactly"}};
  for (const auto& [name, help] : verify_kinds) {
    auto* c = verify_cmd->add_subcommand(name, help);
    add_relaxation_flags(c, o);
    add_exec_flags(c, o);
    c->add_option("--grid", o.grid, "grid denominator: step 1/N (default 64)");
    c->add_option("--out", o.out, "JSON output path (default stdout)");
    c->callback([&verify_what, name] { verify_what = name; });
    if (std::string(name) == "sharpness") c->add_flag("--bilinear", o.bilinear, "check z = xy on the (N+1)^2 grid");
    if (std::string(name) == "hereditary") c->add_option("--pattern", o.pattern, "single fixing pattern, e.g. *0");
    if (std::string(name) == "membership") {
      c->add_option("--in", o.in, "model MPS");
      c->add_option("--point", o.point, "point file: 'name value' lines, values exact (p/q) or decimal");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitParse;
  }

  try {
    if (*relax_cmd) return cmd_relax(o);
    if (*solve_cmd) return cmd_solve(o);
    if (*analyze_cmd) return cmd_analyze(o, analyze_cmd->count("--method") > 0, analyze_cmd->count("--L") > 0);
    if (*env_cmd) return cmd_envelope(o);
    if (*boxqp_cmd) return cmd_boxqp(o);
    if (*verify_cmd) {
      for (auto* c : verify_cmd->get_subcommands())
        if (c->count("--L1") > 0) L1_given = true;
      return cmd_verify(verify_what, o, L1_given);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
