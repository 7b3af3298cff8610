// Univariate machinery for z = x^2: sawtooth functions, piecewise-linear interpolant, epigraph
// cuts, and the S / T / tightened-sawtooth / epigraph MIP emitters.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "relax/milp.hpp"
#include "relax/rational.hpp"

namespace relax {

/// One tooth map G(x) = min{2x, 2(1-x)}.
template <class T>
T tooth_step(const T& x) {
  return tmin<T>(T(2 * x), T(2 * (1 - x)));
}

/// G^j(x): j-fold composition of the tooth map, G^0(x) = x.
template <class T>
T tooth(const T& x, int j) {
  if (x < 0 || x > 1) throw std::domain_error("tooth: x outside [0,1]");
  T g = x;
  for (int k = 0; k < j; ++k) g = tooth_step(g);
  return g;
}

/// F^L(x) = x - sum_{j=1..L} 2^{-2j} G^j(x): the interpolant of x^2 at the points i / 2^L.
template <class T>
T pwl_square(const T& x, int L) {
  if (x < 0 || x > 1) throw std::domain_error("pwl_square: x outside [0,1]");
  T g = x, f = x;
  for (int j = 1; j <= L; ++j) {
    g = tooth_step(g);
    f -= pow2<T>(-2 * j) * g;
  }
  return f;
}

/// Pointwise lower envelope of the depth-L1 epigraph cuts:
/// max(0, 2x-1, max_{j=0..L1} F^j(x) - 2^{-2j-2}).
template <class T>
T epi_lower(const T& x, int L1) {
  if (x < 0 || x > 1) throw std::domain_error("epi_lower: x outside [0,1]");
  T best = tmax<T>(T(0), T(2 * x - 1));
  for (int j = 0; j <= L1; ++j) best = tmax<T>(best, T(pwl_square(x, j) - pow2<T>(-2 * j - 2)));
  return best;
}

struct SawtoothDepths {
  int L = 0;   // upper-bounding depth (binaries)
  int L1 = 0;  // lower-bounding depth (cuts), L1 >= L
};

/// Closed interval [lo, hi] used for variable boxes.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
};

/// Variables of the binary sawtooth system on a unit-box input.
struct SBlock {
  std::vector<VarId> g;      // g_0 .. g_L
  std::vector<VarId> alpha;  // alpha_1 .. alpha_L
};

/// Adds g_0 = xhat and the four inequalities per level j = 1..L linking g_j, g_{j-1}, alpha_j.
SBlock emit_S(MilpModel& m, VarId xhat, int L, const std::string& prefix);
/// Adds g_0..g_L1 with g_0 = xhat, g_j <= 2 g_{j-1}, g_j <= 2 (1 - g_{j-1}).
std::vector<VarId> emit_T(MilpModel& m, VarId xhat, int L1, const std::string& prefix);
/// Extends an existing g chain (from emit_S or emit_T) up to level L1 with the LP rows only.
void extend_T(MilpModel& m, std::vector<VarId>& g, int L1, const std::string& prefix);
/// Lower cuts zhat >= F^j-cut for j = 0..depth plus zhat >= 0, zhat >= 2 xhat - 1.
void emit_epigraph_cuts(MilpModel& m, VarId xhat, VarId zhat, const std::vector<VarId>& g, int depth,
                        const std::string& prefix);

/// Interval transform x = lo + l * xhat (explicit equality row); requires a finite, nondegenerate box.
VarId emit_hat(MilpModel& m, VarId x, const std::string& prefix);
/// Square transform z = l^2 zhat + 2 lo x - lo^2 for a fresh free variable zhat.
VarId emit_square_hat(MilpModel& m, VarId x, VarId z, const std::string& prefix);

struct TsrHandle {
  VarId x = -1, z = -1, xhat = -1, zhat = -1;
  std::vector<VarId> g;  // g_0 .. g_L1
  std::vector<VarId> alpha;
  SawtoothDepths depths;
};

/// Tightened sawtooth rows on unit-box variables (xhat, zhat); g_0..g_L carry binaries.
TsrHandle emit_tsr_unit(MilpModel& m, VarId xhat, VarId zhat, SawtoothDepths d, const std::string& prefix);
/// Tightened sawtooth relaxation of z = x^2 on x's box (interval-transformed).
TsrHandle emit_tightened_sawtooth(MilpModel& m, VarId x, VarId z, SawtoothDepths d, const std::string& prefix = "");

struct EpiHandle {
  VarId p = -1, zp = -1, phat = -1, zphat = -1;
  std::vector<VarId> g;
  int L1 = 0;
};

/// Binary-free epigraph relaxation zp >= p^2 of depth L1 on p's box.
EpiHandle emit_epigraph_unit(MilpModel& m, VarId phat, VarId zphat, int L1, const std::string& prefix);
EpiHandle emit_sawtooth_epigraph(MilpModel& m, VarId p, VarId zp, int L1, const std::string& prefix = "");

struct SawtoothWitness {
  std::vector<Rational> g;  // g_0 .. g_L1
  std::vector<int> alpha;   // alpha_1 .. alpha_L
  Rational zmin, zmax;      // in unit-box coordinates
};

/// Canonical feasible completion for a unit-box point xhat: g_j = G^j(xhat), alpha_j = [g_{j-1} > 1/2].
SawtoothWitness sawtooth_witness(const Rational& xhat, SawtoothDepths d);
/// Same for a point x of the interval `box` (mapped to the unit box first).
SawtoothWitness sawtooth_witness(const Rational& x, const Interval& box, SawtoothDepths d);

void check_depths(SawtoothDepths d);

}  // namespace relax
