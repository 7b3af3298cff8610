// Linear mixed-integer model IR that the relaxations emit into, plus MPS I/O.
#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "relax/model.hpp"

namespace relax {

using VarId = int;

enum class Origin { Original, AuxG, AuxAlpha, AuxBeta, AuxU, AuxV, AuxDelta, AuxZ, AuxP, AuxHat };
std::string to_string(Origin o);

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MilpVar {
  std::string name;
  double lb = 0.0;
  double ub = 0.0;
  VarKind kind = VarKind::Continuous;
  Origin origin = Origin::Original;
};

/// Sparse affine expression sum(coef * var) + constant.
struct LinExpr {
  std::map<VarId, double> terms;
  double constant = 0.0;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  static LinExpr var(VarId v, double coef = 1.0) {
    LinExpr e;
    e.terms[v] = coef;
    return e;
  }
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);
};
LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);

struct Row {
  std::string name;
  std::map<VarId, double> coefs;
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

enum class Direction { Minimize, Maximize };

class MilpModel {
 public:
  std::string name = "relaxation";
  std::vector<MilpVar> vars;
  std::vector<Row> rows;
  std::map<VarId, double> objective;
  double objective_constant = 0.0;
  Direction direction = Direction::Minimize;

  VarId add_var(const std::string& name, double lb, double ub, VarKind kind = VarKind::Continuous,
                Origin origin = Origin::Original);
  VarId add_binary(const std::string& name, Origin origin) { return add_var(name, 0, 1, VarKind::Binary, origin); }
  /// Adds the row lhs (sense) rhs; constants are moved to the right-hand side, zero terms dropped.
  int add_row(const LinExpr& lhs, Sense sense, const LinExpr& rhs, const std::string& name = "");
  void set_objective(const LinExpr& e, Direction dir);

  int n_vars() const { return static_cast<int>(vars.size()); }
  int n_rows() const { return static_cast<int>(rows.size()); }
  int n_binaries() const;
  int n_continuous() const { return n_vars() - n_binaries(); }
  VarId find(const std::string& name) const;  // -1 when absent

  /// Throws std::invalid_argument on dangling references, NaN/inf coefficients or bad bounds.
  void validate() const;
  /// Largest row violation (absolute) of a point; bound violations included.
  double max_violation(const std::vector<double>& x) const;

 private:
  std::map<std::string, VarId> index_;
};

/// LP relaxation: every binary becomes continuous on [0,1].
MilpModel lp_relax(const MilpModel& m);

/// Free-format MPS. Objective sense is encoded with OBJSENSE when maximizing.
std::string write_mps(const MilpModel& m);
/// Reader for the subset written by write_mps (used for round-trip checks).
MilpModel read_mps(const std::string& text);
/// Human-readable debug dump in an LP-like syntax (no compatibility promise).
std::string write_lp_debug(const MilpModel& m);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace relax
