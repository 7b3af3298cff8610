// Built-in LP / small-MIP solver (exact rational or floating point) and the external-solver bridge.
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relax/milp.hpp"
#include "relax/rational.hpp"

namespace relax {

enum class SolveStatus { Optimal, Infeasible, Unbounded };
std::string to_string(SolveStatus s);

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Arithmetic { Exact, Float };

struct SolveOptions {
  Arithmetic arithmetic = Arithmetic::Exact;
  int max_binaries = 24;  // free binaries after fixings
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::optional<Rational> exact_objective;  // set by the exact built-in path
  std::vector<double> values;               // indexed by VarId
  std::vector<Rational> exact_values;       // exact built-in path only
  long nodes = 0;                           // branch-and-bound nodes explored
};

/// Solves the model (honouring its direction) after fixing the given variables.
/// Binaries are enumerated by depth-first branching in declaration order, 0-branch first.
SolveResult solve_builtin(const MilpModel& model, const std::map<VarId, int>& fixings = {},
                          const SolveOptions& opts = {});

/// Convenience: optimum of min/max of a single variable, with extra temporary bounds.
SolveResult optimize_var(const MilpModel& model, VarId v, Direction dir, const std::map<VarId, int>& fixings = {},
                         const SolveOptions& opts = {});

/// Runs an external solver: writes the MPS to {mps}, expects "name value" lines in {sol}.
SolveResult solve_external(const MilpModel& model, const std::string& cmd_template);

/// Parses a solution file ("name value" per line, '#' comments); unknown names are an error.
std::vector<double> parse_solution(const MilpModel& model, const std::string& text);

}  // namespace relax
