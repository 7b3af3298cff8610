// Whole-problem relaxation: replaces every quadratic term of a Miqcqp by an auxiliary variable
// bound through the configured per-term relaxation, and reports the resulting model size.
#pragma once

#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "relax/bilinear.hpp"
#include "relax/milp.hpp"
#include "relax/model.hpp"
#include "relax/solver.hpp"

namespace relax {

/// Bookkeeping of the relaxed terms.
struct TermMap {
  std::vector<VarId> var_of;                  // original variable index -> MILP variable
  std::map<std::pair<int, int>, VarId> z;     // unordered pair (i <= j) -> auxiliary z variable
  std::map<std::tuple<int, int, int>, VarId> combo;  // (i, j, sign) -> shared x_i +/- x_j (separable methods)
  TermEmitter::WitnessFn witness;             // completes original values to a full MILP point
};

struct RelaxationReport {
  std::string method;
  int L = 0;
  int L1 = 0;
  double lambda = 0.5;
  int n_binaries = 0;
  int n_continuous = 0;
  int n_rows = 0;
  int n_vars = 0;
  int n_quadratic_vars = 0;    // non-fixed variables appearing in relaxed terms
  int n_bilinear_terms = 0;
  int n_square_terms = 0;
  double predicted_binaries = 0;   // Table 1 formula
  long structural_binaries = 0;    // what a shared discretization needs on a dense instance
  bool objective_dense = false;
  std::vector<bool> constraint_dense;

  std::string to_json() const;
};

struct Relaxation {
  MilpModel model;
  TermMap terms;
  RelaxationReport report;
};

/// Relaxes the whole problem. Throws ModelError for unbounded quadratic variables and
/// std::invalid_argument for inconsistent configurations (e.g. "L1 < L").
Relaxation relax_problem(const Miqcqp& prob, const RelaxationConfig& cfg);

/// Table 1 binary count for a dense instance with n quadratic variables:
/// nL for HybS and the NMDT family, (n^2 + 1) L / 2 for Bin2 / Bin3, 0 for McCormick.
double count_binaries(int n, Method method, int L);
/// Binaries actually needed with one sawtooth block per variable and per pair (Bin2 / Bin3:
/// n(n+1)/2 * L) or one digit vector per variable (HybS, NMDT family: nL).
long structural_binaries(int n, Method method, int L);

struct SolverBackend {
  enum class Kind { BuiltinExact, BuiltinFloat, External } kind = Kind::BuiltinFloat;
  std::string command;  // external command template with {mps} and {sol}
  int max_binaries = 24;
};

struct DualBound {
  double value = 0.0;
  SolveResult result;
};

/// Optimal value of the MIP relaxation (a lower bound on the minimization MIQCQP).
/// Throws SolverError when the relaxation is infeasible, unbounded, or the backend fails.
DualBound dual_bound(const Miqcqp& prob, const RelaxationConfig& cfg, const SolverBackend& solver = {});

}  // namespace relax
