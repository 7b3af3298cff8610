// Per-term relaxations of z = xy and z = x^2 on general boxes, and their closed-form envelopes.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "relax/milp.hpp"
#include "relax/rational.hpp"
#include "relax/sawtooth.hpp"

namespace relax {

enum class Method { McCormickOnly, Bin2, Bin3, HybS, NMDT, TNMDT, DNMDT, TDNMDT };

std::string to_string(Method m);
Method parse_method(const std::string& s);
const std::vector<Method>& all_methods();
bool is_separable(Method m);     // Bin2, Bin3, HybS
bool is_nmdt_family(Method m);   // NMDT, TNMDT, DNMDT, TDNMDT
bool needs_L1(Method m);         // separable methods and the T-variants

struct RelaxationConfig {
  Method method = Method::HybS;
  int L = 1;
  int L1 = -1;  // negative: use default_L1(L)
  double lambda = 0.5;
  bool include_mccormick = true;
  int nmdt_side = -1;  // NMDT factor to discretize: 0 = first, 1 = second, -1 = wider interval

  static int default_L1(int L);  // max{2, ceil(1.5 L)}
  int l1() const { return L1 < 0 ? default_L1(L) : L1; }
  SawtoothDepths depths() const { return {L, l1()}; }
  /// Throws std::invalid_argument (e.g. "L1 < L") on inconsistent settings.
  void validate() const;
};

/// One base-2 discretization x_hat = sum_j 2^{-j} beta_j + delta, delta in [0, 2^{-L}].
struct Digits {
  VarId hat = -1;
  std::vector<VarId> beta;
  VarId delta = -1;
};

/// Emits per-term relaxations into a model, sharing per-variable auxiliaries (interval transforms,
/// sawtooth blocks, base-2 digits, x +/- y blocks) across all terms emitted through the same instance.
/// Every auxiliary also gets a witness recipe, so a point of the original variables can be completed
/// to a feasible assignment of the whole relaxation (see `witness`).
class TermEmitter {
 public:
  TermEmitter(MilpModel& m, RelaxationConfig cfg);

  const RelaxationConfig& config() const { return cfg_; }
  MilpModel& model() { return m_; }

  /// z = x*y (x != y). Creates z when not provided. Returns z.
  VarId bilinear(VarId x, VarId y, std::optional<VarId> z = std::nullopt);
  /// z = x^2. Creates z when not provided. Returns z.
  VarId univariate(VarId x, std::optional<VarId> z = std::nullopt);

  VarId hat(VarId x);
  const Digits& digits(VarId x);
  /// Square variable of x under the tightened sawtooth relaxation (created once per variable).
  VarId tsr_square(VarId x, std::optional<VarId> z = std::nullopt);
  /// Square variable of x under the binary-free epigraph relaxation (created once per variable).
  VarId epigraph_square(VarId x);
  /// Variable p = x + sign*y with its induced box (shared per ordered pair and sign).
  VarId combo(VarId x, VarId y, int sign);

  /// Which factor NMDT discretizes for the pair (x, y).
  VarId nmdt_discretized(VarId x, VarId y) const;

  /// Completes values of pre-existing variables to a full assignment satisfying every emitted row.
  std::vector<Rational> witness(std::vector<Rational> values) const;
  using WitnessFn = std::function<std::vector<Rational>(std::vector<Rational>)>;
  /// Self-contained copy of the witness recipes (outlives the emitter).
  WitnessFn witness_fn() const;

  /// Shared x +/- y variables keyed by (x, y, sign).
  const std::map<std::tuple<VarId, VarId, int>, VarId>& combos() const { return combo_; }

 private:
  MilpModel& m_;
  RelaxationConfig cfg_;
  std::map<VarId, VarId> hat_, tsr_, epi_;
  std::map<VarId, Digits> digits_;
  std::map<std::tuple<VarId, VarId, int>, VarId> combo_;
  std::vector<std::function<void(std::vector<Rational>&)>> recipes_;

  std::string name(VarId v) const { return m_.vars.at(v).name; }
  Interval box(VarId v) const;
  VarId new_z(const std::string& nm);
  void emit_separable(VarId x, VarId y, VarId z);
  void emit_nmdt(VarId x, VarId y, VarId z);
  void emit_dnmdt(VarId x, VarId y, VarId z);
  void emit_univariate_nmdt(VarId x, VarId z);
};

/// McCormick envelope of z = a*b for affine factors with boxes [al, au], [bl, bu].
/// `lower` / `upper` select which pairs of rows are emitted.
void emit_mccormick_expr(MilpModel& m, const LinExpr& a, Interval ba, const LinExpr& b, Interval bb,
                         const LinExpr& z, const std::string& prefix, bool lower = true, bool upper = true);
/// The four McCormick rows on variables x, y, z using their declared boxes (binary partners included).
void emit_mccormick(MilpModel& m, VarId x, VarId y, VarId z);
/// Square variant: z >= 2 lo x - lo^2, z >= 2 hi x - hi^2, z <= (lo + hi) x - lo hi.
void emit_mccormick_square(MilpModel& m, const LinExpr& x, Interval bx, const LinExpr& z, const std::string& prefix,
                           bool lower = true, bool upper = true);

// Single-term emitters (fresh sharing context each call). They return the emitter so callers can
// build witnesses or inspect auxiliaries.
TermEmitter emit_bin2(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg);
TermEmitter emit_bin3(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg);
TermEmitter emit_hybs(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg);
TermEmitter emit_nmdt(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg);
TermEmitter emit_dnmdt(MilpModel& m, VarId x, VarId y, VarId z, RelaxationConfig cfg);
TermEmitter emit_univariate(MilpModel& m, VarId x, VarId z, RelaxationConfig cfg);

/// Builds a stand-alone model containing only the relaxation of z = x*y (or z = x^2 when
/// `square`) on the given boxes. Variable ids: x = 0, y = 1 (absent when square), z last original.
struct TermModel {
  MilpModel model;
  VarId x = -1, y = -1, z = -1;
  TermEmitter::WitnessFn witness;
};
TermModel make_term_model(const RelaxationConfig& cfg, Interval bx, Interval by, bool square);

// ---------------------------------------------------------------------------------------------
// Closed-form envelopes: exact pointwise min / max of z over the projected MIP relaxation.

template <class T>
struct ZRange {
  T lo, hi;
  bool hi_infinite = false;
};

struct EnvelopeMode {
  bool limit = false;  // replace every lower sawtooth / epigraph part by the exact parabola (L1 -> inf)
};

template <class T>
ZRange<T> envelope_bilinear(const RelaxationConfig& cfg, Interval bx, Interval by, const T& x, const T& y,
                            EnvelopeMode mode = {});
template <class T>
ZRange<T> envelope_square(const RelaxationConfig& cfg, Interval bx, const T& x, EnvelopeMode mode = {});

/// McCormick range of x*y over the box (closed form).
template <class T>
ZRange<T> mccormick_range(const T& xl, const T& xu, const T& yl, const T& yu, const T& x, const T& y);

enum class EnvSide { Min, Max };
/// Convenience wrapper on the unit box: envelope value of z at (x, y) (y ignored when square).
double envelope(Method method, double x, double y, const RelaxationConfig& cfg, EnvSide side, bool square = false);

}  // namespace relax
