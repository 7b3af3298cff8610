// MIQCQP instances: variables with boxes, quadratic forms, constraints, JSON I/O.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace relax {

enum class VarKind { Continuous, Binary };
enum class Sense { Le, Ge, Eq };

std::string to_string(Sense s);
Sense parse_sense(const std::string& s);

/// Error raised by instance parsing and validation; `path` is a JSON pointer-like location.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct VarDecl {
  std::string name;
  double lb = 0.0;
  double ub = 0.0;
  VarKind kind = VarKind::Continuous;

  bool fixed() const { return lb == ub; }
};

struct QuadTerm {
  int i = 0;  // i <= j
  int j = 0;
  double coef = 0.0;
};

/// x'Qx + c'x + d'y + b with Q stored upper-triangular (one entry per unordered pair).
struct QuadraticForm {
  std::vector<QuadTerm> quad;
  std::map<int, double> lin;
  double constant = 0.0;

  /// Sort entries, merge duplicates and mirror pairs, drop zeros.
  void canonicalize();
  double evaluate(const std::vector<double>& x) const;
  bool has_quadratic() const { return !quad.empty(); }
};

struct Constraint {
  QuadraticForm form;
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

struct Miqcqp {
  std::string name;
  std::vector<VarDecl> vars;
  QuadraticForm objective;  // minimized
  std::vector<Constraint> constraints;

  int index_of(const std::string& var) const;  // -1 when absent
  int n_continuous() const;
  /// Variables that appear in at least one quadratic term (sorted).
  std::vector<int> quadratic_vars() const;
  /// Throws ModelError when an invariant is violated.
  void validate() const;
};

/// Fraction of nonzeros of the symmetric n x n matrix implied by `form.quad`.
double density(const QuadraticForm& form, int n);
/// Dense means at least a quarter of the implied matrix entries are nonzero.
bool is_dense(const QuadraticForm& form, int n);

Miqcqp parse_instance(const std::string& json_text);
std::string serialize_instance(const Miqcqp& prob);

/// Seeded boxQP instance: min x'Qx + c'x over [0,1]^n with integer coefficients in [-50, 50];
/// each entry of Q (i <= j) is present, and then nonzero, with probability `density`.
Miqcqp random_boxqp(int n, double density, std::uint64_t seed);

}  // namespace relax
