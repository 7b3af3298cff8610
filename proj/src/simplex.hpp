// Dense-tableau bounded-variable simplex used by the built-in solver.
//
// Each row i reads  sum_j a_ij x_j - s_i (+ sigma_i art_i) = 0  where the slack s_i carries the
// row's sense as bounds.  Phase 1 minimises the artificials; phase 2 the true cost.  A dual simplex
// re-optimises after bound changes so branch-and-bound children start from their parent's basis.
// Pricing is largest-coefficient (Dantzig); after a run of degenerate steps it switches to the
// smallest-index (Bland) rule until progress resumes, which rules out cycling in exact arithmetic.
#pragma once

#include <cmath>
#include <vector>

#include "relax/rational.hpp"

namespace relax::detail {

template <class T>
struct Num;

template <>
struct Num<Rational> {
  static int sgn(const Rational& v) { return ::sgn(v); }
  static void clean(Rational&) {}
  static bool integral(const Rational& v) { return v.get_den() == 1; }
  static Rational mag(const Rational& v) { return abs(v); }
};

template <>
struct Num<double> {
  static constexpr double eps = 1e-9;
  static int sgn(double v) { return v > eps ? 1 : (v < -eps ? -1 : 0); }
  static void clean(double& v) {
    if (std::abs(v) < 1e-13) v = 0.0;
  }
  static bool integral(double v) { return std::abs(v - std::round(v)) <= 1e-7; }
  static double mag(double v) { return std::abs(v); }
};

/// Bounded LP data in row form with explicit senses (0: <=, 1: >=, 2: ==).
template <class T>
struct LpData {
  int n = 0;
  std::vector<T> lb, ub;
  std::vector<char> has_lb, has_ub;
  std::vector<std::vector<std::pair<int, T>>> rows;
  std::vector<int> sense;
  std::vector<T> rhs;
  std::vector<T> cost;  // minimised
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <class T>
class Simplex {
 public:
  explicit Simplex(const LpData<T>& lp) { build(lp); }

  /// Two-phase primal simplex from the slack/artificial start basis.
  LpStatus solve() {
    if (n_art_ > 0) {
      std::vector<T> c1(cols_, T(0));
      for (int k = first_art_; k < cols_; ++k) c1[k] = T(1);
      set_cost(c1);
      if (primal() != LpStatus::Optimal) return LpStatus::Infeasible;  // cannot happen: bounded below
      T infeas(0);
      for (int k = first_art_; k < cols_; ++k) infeas += x_[k];
      if (Num<T>::sgn(infeas) > 0) return LpStatus::Infeasible;
      for (int k = first_art_; k < cols_; ++k) {
        ub_[k] = T(0);
        has_ub_[k] = 1;
        x_[k] = T(0);
      }
    }
    std::vector<T> c2(cols_, T(0));
    for (int k = 0; k < n_; ++k) c2[k] = cost_[k];
    set_cost(c2);
    return primal();
  }

  /// Tightens bounds of a structural variable and restores optimality with the dual simplex.
  void set_bounds(int k, const T& lo, const T& hi) {
    lb_[k] = lo;
    ub_[k] = hi;
    has_lb_[k] = has_ub_[k] = 1;
    if (pos_[k] < 0) {
      T target = lo;
      if (Num<T>::sgn(d_[k]) < 0) target = hi;
      shift_nonbasic(k, target);
    }
  }

  LpStatus reoptimize() { return dual(); }

  T objective() const {
    T v(0);
    for (int k = 0; k < n_; ++k)
      if (cost_[k] != 0) v += cost_[k] * x_[k];
    return v;
  }
  const T& value(int k) const { return x_[k]; }

 private:
  int m_ = 0, n_ = 0, cols_ = 0, first_art_ = 0, n_art_ = 0;
  std::vector<T> tab_;  // m_ x cols_
  std::vector<int> basis_, pos_;
  std::vector<T> x_, lb_, ub_, d_, c_, cost_;
  std::vector<char> has_lb_, has_ub_;

  T& at(int i, int k) { return tab_[static_cast<size_t>(i) * cols_ + k]; }
  const T& at(int i, int k) const { return tab_[static_cast<size_t>(i) * cols_ + k]; }

  bool below_ub(int k) const { return !has_ub_[k] || x_[k] < ub_[k]; }
  bool above_lb(int k) const { return !has_lb_[k] || x_[k] > lb_[k]; }

  void build(const LpData<T>& lp) {
    m_ = static_cast<int>(lp.rows.size());
    n_ = lp.n;
    cost_ = lp.cost;
    const int base = n_ + m_;
    std::vector<T> act(m_, T(0));
    std::vector<T> xs(base, T(0));
    std::vector<T> lbs(base), ubs(base);
    std::vector<char> hl(base, 0), hu(base, 0);
    for (int k = 0; k < n_; ++k) {
      lbs[k] = lp.lb[k];
      ubs[k] = lp.ub[k];
      hl[k] = lp.has_lb[k];
      hu[k] = lp.has_ub[k];
      xs[k] = hl[k] ? lbs[k] : (hu[k] ? ubs[k] : T(0));
    }
    for (int i = 0; i < m_; ++i) {
      for (const auto& [j, a] : lp.rows[i]) act[i] += a * xs[j];
      const int s = n_ + i;
      lbs[s] = ubs[s] = lp.rhs[i];
      hl[s] = lp.sense[i] != 0;  // >= or ==
      hu[s] = lp.sense[i] != 1;  // <= or ==
    }
    // Decide which rows need an artificial.
    std::vector<int> sigma(m_, 0);
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      if (hl[s] && act[i] < lbs[s]) {
        sigma[i] = 1;
        xs[s] = lbs[s];
      } else if (hu[s] && act[i] > ubs[s]) {
        sigma[i] = -1;
        xs[s] = ubs[s];
      } else {
        xs[s] = act[i];
      }
    }
    n_art_ = 0;
    for (int i = 0; i < m_; ++i) n_art_ += sigma[i] != 0;
    first_art_ = base;
    cols_ = base + n_art_;
    tab_.assign(static_cast<size_t>(m_) * cols_, T(0));
    x_.assign(cols_, T(0));
    lb_.assign(cols_, T(0));
    ub_.assign(cols_, T(0));
    has_lb_.assign(cols_, 0);
    has_ub_.assign(cols_, 0);
    for (int k = 0; k < base; ++k) {
      x_[k] = xs[k];
      lb_[k] = lbs[k];
      ub_[k] = ubs[k];
      has_lb_[k] = hl[k];
      has_ub_[k] = hu[k];
    }
    basis_.assign(m_, -1);
    pos_.assign(cols_, -1);
    int art = first_art_;
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      if (sigma[i] == 0) {
        for (const auto& [j, a] : lp.rows[i]) at(i, j) -= a;
        at(i, s) = T(1);
        basis_[i] = s;
        pos_[s] = i;
      } else {
        const T sg(sigma[i]);
        for (const auto& [j, a] : lp.rows[i]) at(i, j) += sg * a;
        at(i, s) = -sg;
        at(i, art) = T(1);
        has_lb_[art] = 1;  // artificial in [0, inf)
        x_[art] = sigma[i] > 0 ? T(xs[s] - act[i]) : T(act[i] - xs[s]);
        basis_[i] = art;
        pos_[art] = i;
        ++art;
      }
    }
  }

  void set_cost(const std::vector<T>& c) {
    c_ = c;
    d_ = c;
    for (int i = 0; i < m_; ++i) {
      const T& cb = c_[basis_[i]];
      if (cb == 0) continue;
      for (int k = 0; k < cols_; ++k)
        if (at(i, k) != 0) d_[k] -= cb * at(i, k);
    }
    for (auto& v : d_) Num<T>::clean(v);
  }

  void shift_nonbasic(int k, const T& target) {
    const T delta = target - x_[k];
    if (delta == 0) return;
    x_[k] = target;
    for (int i = 0; i < m_; ++i)
      if (at(i, k) != 0) x_[basis_[i]] -= delta * at(i, k);
  }

  void pivot(int r, int e) {
    const T piv = at(r, e);
    T* rowr = &tab_[static_cast<size_t>(r) * cols_];
    for (int k = 0; k < cols_; ++k)
      if (rowr[k] != 0) rowr[k] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      T f = at(i, e);
      if (f == 0) continue;
      T* rowi = &tab_[static_cast<size_t>(i) * cols_];
      for (int k = 0; k < cols_; ++k) {
        if (rowr[k] == 0) continue;
        rowi[k] -= f * rowr[k];
        Num<T>::clean(rowi[k]);
      }
      rowi[e] = T(0);
    }
    const T f = d_[e];
    if (f != 0) {
      for (int k = 0; k < cols_; ++k) {
        if (rowr[k] == 0) continue;
        d_[k] -= f * rowr[k];
        Num<T>::clean(d_[k]);
      }
      d_[e] = T(0);
    }
    const int leaving = basis_[r];
    pos_[leaving] = -1;
    basis_[r] = e;
    pos_[e] = r;
  }

  static constexpr int kDegenerateRun = 50;

  LpStatus primal() {
    int degenerate = 0;
    for (;;) {
      const bool bland = degenerate >= kDegenerateRun;
      int e = -1, dir = 0;
      T best_d(0);
      for (int k = 0; k < cols_; ++k) {
        if (pos_[k] >= 0) continue;
        const int s = Num<T>::sgn(d_[k]);
        int kd = 0;
        if (s < 0 && below_ub(k)) kd = 1;
        else if (s > 0 && above_lb(k)) kd = -1;
        if (kd == 0) continue;
        const T m = Num<T>::mag(d_[k]);
        if (e < 0 || m > best_d) {
          e = k;
          dir = kd;
          best_d = m;
        }
        if (bland) break;
      }
      if (e < 0) return LpStatus::Optimal;
      // Ratio test: x_B changes at rate -dir * T[i][e] per unit step.
      bool flip_ok = dir > 0 ? has_ub_[e] : has_lb_[e];
      const T flip = flip_ok ? (dir > 0 ? T(ub_[e] - x_[e]) : T(x_[e] - lb_[e])) : T(0);
      int leave_row = -1;
      T lim_row(0);
      bool leave_to_ub = false;
      for (int i = 0; i < m_; ++i) {
        const int sg = Num<T>::sgn(at(i, e));
        if (sg == 0) continue;
        const int b = basis_[i];
        const int rate = -dir * sg;
        const T mag = sg > 0 ? at(i, e) : T(-at(i, e));
        T lim;
        if (rate < 0) {
          if (!has_lb_[b]) continue;
          lim = (x_[b] - lb_[b]) / mag;
        } else {
          if (!has_ub_[b]) continue;
          lim = (ub_[b] - x_[b]) / mag;
        }
        if (lim < 0) lim = T(0);
        if (leave_row < 0 || lim < lim_row || (lim == lim_row && b < basis_[leave_row])) {
          leave_row = i;
          lim_row = lim;
          leave_to_ub = rate > 0;
        }
      }
      const bool bounded = flip_ok || leave_row >= 0;
      if (flip_ok && (leave_row < 0 || !(lim_row < flip))) leave_row = -1;
      const T best = leave_row < 0 ? flip : lim_row;
      if (!bounded) return LpStatus::Unbounded;
      const T step = dir > 0 ? best : T(-best);
      degenerate = Num<T>::sgn(best) == 0 ? degenerate + 1 : 0;
      if (step != 0) {
        x_[e] += step;
        for (int i = 0; i < m_; ++i)
          if (at(i, e) != 0) x_[basis_[i]] -= step * at(i, e);
      }
      if (leave_row < 0) {
        x_[e] = dir > 0 ? ub_[e] : lb_[e];
        continue;
      }
      const int b = basis_[leave_row];
      x_[b] = leave_to_ub ? ub_[b] : lb_[b];
      pivot(leave_row, e);
    }
  }

  LpStatus dual() {
    int degenerate = 0;
    for (;;) {
      const bool bland = degenerate >= kDegenerateRun;
      int r = -1, best_b = -1;
      bool raise = false;
      T worst(0);
      for (int i = 0; i < m_; ++i) {
        const int b = basis_[i];
        const T below = has_lb_[b] ? T(lb_[b] - x_[b]) : T(0), above = has_ub_[b] ? T(x_[b] - ub_[b]) : T(0);
        const bool lowv = has_lb_[b] && Num<T>::sgn(below) > 0;
        const bool highv = has_ub_[b] && Num<T>::sgn(above) > 0;
        if (!lowv && !highv) continue;
        const T v = lowv ? below : above;
        if (r < 0 || (bland ? b < best_b : (v > worst || (v == worst && b < best_b)))) {
          best_b = b;
          r = i;
          raise = lowv;
          worst = v;
        }
      }
      if (r < 0) return primal();  // primal feasible; cleans up any dual slips in float mode
      // x_b = const - sum_k T[r][k] x_k.  To raise x_b move x_k against sign(T[r][k]).
      int e = -1;
      T best(0), piv(0);
      for (int k = 0; k < cols_; ++k) {
        if (pos_[k] >= 0) continue;
        const int sg = Num<T>::sgn(at(r, k));
        if (sg == 0) continue;
        const int move = raise ? -sg : sg;  // required direction of x_k
        if (move > 0 && !below_ub(k)) continue;
        if (move < 0 && !above_lb(k)) continue;
        const T a = Num<T>::mag(at(r, k));
        T dk = Num<T>::mag(d_[k]);
        if (Num<T>::sgn(d_[k]) == 0) dk = T(0);
        const T ratio = dk / a;
        if (e < 0 || ratio < best || (!bland && ratio == best && a > piv)) {
          e = k;
          best = ratio;
          piv = a;
        }
      }
      if (e < 0) return LpStatus::Infeasible;
      degenerate = Num<T>::sgn(best) == 0 ? degenerate + 1 : 0;
      const int b = basis_[r];
      const T target = raise ? lb_[b] : ub_[b];
      const T delta = (x_[b] - target) / at(r, e);  // change of x_e
      x_[e] += delta;
      for (int i = 0; i < m_; ++i)
        if (at(i, e) != 0) x_[basis_[i]] -= delta * at(i, e);
      x_[b] = target;
      pivot(r, e);
    }
  }
};

}  // namespace relax::detail
