// Analytic error / volume catalog of the relaxations and the empirical estimators that check it.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relax/bilinear.hpp"
#include "relax/rational.hpp"

namespace relax {

/// Execution policy of the sweeps. The serial path is the reference implementation; the parallel
/// path (OpenMP) merges partial results in a fixed order and returns bit-identical values.
struct Exec {
  bool parallel = false;
  int jobs = 0;  // 0: OpenMP default
};

/// Maximum pointwise error bound of z = xy on the unit box. Exact results have lower == upper;
/// the separable methods come with a proven lower bound 2^{-2L-2} and an upper bound.
struct ErrorBound {
  double lower = 0.0;
  double upper = 0.0;
  bool exact() const { return lower == upper; }
};
ErrorBound analytic_max_error(Method method, int L, int L1);

/// Maximum under- / over-estimation of z = x^2 on [0,1] by the univariate relaxation.
/// Values are exact maxima except for T-NMDT's underestimation, which is an upper bound.
struct SquareErrorBound {
  double under = 0.0;  // max of x^2 - zmin
  double over = 0.0;   // max of zmax - x^2
};
SquareErrorBound analytic_square_error(Method method, int L, int L1);

/// Average error (band volume on the unit box) for L1 -> infinity and without McCormick rows.
Rational analytic_avg_error(Method method, int L);

/// Limit LP-relaxation envelopes on a general box (xl, xu) x (yl, yu).
double c2_lower(double x, double y, double xl, double xu, double yl, double yu);
double c2_upper(double x, double y, double xl, double xu, double yl, double yu);
double c3_lower(double x, double y, double xl, double xu, double yl, double yu);
double c3_upper(double x, double y, double xl, double xu, double yl, double yu);

/// Closed-form limit LP volume (no McCormick rows) on a box with side lengths lx, ly.
/// HybS: (lx ly^3 + ly lx^3) / 6; Bin2 / Bin3: lx ly (2 lx^2 + 3 lx ly + 2 ly^2) / 12.
template <class T>
T lp_volume(Method method, const T& lx, const T& ly);
/// Bin2/Bin3 minus HybS limit LP volume: lx^2 ly^2 / 4.
template <class T>
T lp_volume_gap(const T& lx, const T& ly) {
  return lx * lx * ly * ly / 4;
}
/// Numerical volume between two envelope functions on the box (composite Gauss-Legendre, n^2 panels).
double integrate_band(double (*upper)(double, double, double, double, double, double),
                      double (*lower)(double, double, double, double, double, double), double xl, double xu,
                      double yl, double yu, int panels = 64);

struct Point2 {
  double x = 0.0, y = 0.0;
};

struct EmpiricalMax {
  double max_under = 0.0;  // max of f - zmin
  double max_over = 0.0;   // max of zmax - f
  double max = 0.0;
  Point2 argmax;           // first grid point (row-major) attaining max
  Point2 argmax_under, argmax_over;
  long points = 0;
};

/// Maximum pointwise band deviation from f = xy (or x^2 when `square`) over the uniform grid with
/// `n` points per axis on the unit box, using the closed-form envelopes of `cfg`.
EmpiricalMax empirical_max_error(const RelaxationConfig& cfg, bool square, int n, Exec exec = {});

struct EmpiricalAvg {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

/// Monte-Carlo estimate of the band volume (average error) with uniform samples on the unit box.
/// Samples are drawn in fixed-size blocks with per-block seeds, so the result does not depend on
/// the number of threads.
EmpiricalAvg monte_carlo_avg_error(const RelaxationConfig& cfg, bool square, long samples, std::uint64_t seed,
                                   EnvelopeMode mode = {true}, Exec exec = {});

/// Exact band volumes of z = xy per grid cell on the unit box in the Table 1 setting (L1 -> infinity,
/// McCormick rows off), by splitting each cell along the envelope's break lines and integrating the
/// piecewise-quadratic band exactly. Cells have width 2^{-q}; returned in row-major order (x outer).
std::vector<Rational> cell_volumes(const RelaxationConfig& cfg, int q, Exec exec = {});
Rational exact_avg_error(const RelaxationConfig& cfg, Exec exec = {});

struct ErrorReport {
  Method method = Method::HybS;
  int L = 0, L1 = 0;
  ErrorBound analytic_max;
  double analytic_avg = 0.0;
  double empirical_max = 0.0;
  double empirical_avg = 0.0;
  double empirical_avg_se = 0.0;
  Point2 maximizer;
};

/// Combined analytic / empirical row: the maximum uses `cfg` as given, the average uses the
/// Table 1 setting (limit lower envelopes, no McCormick rows).
ErrorReport error_report(const RelaxationConfig& cfg, int grid_points, long samples, std::uint64_t seed,
                         Exec exec = {});

enum class BreakpointFamily { SeparableCubic, McCormickQuadratic };
BreakpointFamily parse_breakpoint_family(const std::string& s);

/// Average-error objective of a breakpoint placement with piece lengths lx (sum 1) and ly (sum 1):
/// separable-cubic: (1/6) sum_i sum_j (lx_i ly_j^3 + ly_j lx_i^3); mccormick-quadratic:
/// (1/6) (sum lx_i^2)(sum ly_j^2). Throws std::invalid_argument when lengths are negative or do not
/// sum to 1 (tolerance 1e-12; exact for rationals).
template <class T>
T breakpoint_objective(BreakpointFamily family, const std::vector<T>& lx, const std::vector<T>& ly);

}  // namespace relax
