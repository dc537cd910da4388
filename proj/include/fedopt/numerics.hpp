#ifndef FEDOPT_NUMERICS_HPP
#define FEDOPT_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace fedopt {

struct BracketError : std::runtime_error {
  explicit BracketError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericalDomainError : std::runtime_error {
  explicit NumericalDomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bisection root finding for a sign-changing g on [lo, hi].
template <typename F>
double bisect_root(F&& g, double lo, double hi, double tol) {
  if (!(lo < hi)) throw std::invalid_argument("bisect_root: lo < hi required");
  if (!(tol > 0)) throw std::invalid_argument("bisect_root: tol must be > 0");
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo > 0) == (ghi > 0))
    throw BracketError("bisect_root: g(lo) and g(hi) have the same sign");
  for (int it = 0; it < 300; ++it) {
    double mid = 0.5 * (lo + hi);
    double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0) == (glo > 0)) { lo = mid; glo = gm; }
    else hi = mid;
    if (hi - lo <= tol * std::max(1.0, std::abs(mid))) return 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

/// Golden-section minimization of a unimodal f on [lo, hi].
template <typename F>
std::pair<double, double> golden_section_min(F&& f, double lo, double hi, double rel_tol,
                                             int max_iter = 200) {
  static constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > rel_tol * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  double xm = 0.5 * (a + b);
  double fm = f(xm);
  if (f1 < fm && f1 <= f2) return {x1, f1};
  if (f2 < fm) return {x2, f2};
  return {xm, fm};
}

/// Projected-gradient minimization of a smooth convex f over a box, with
/// Barzilai-Borwein steps and backtracking. Terminates when the projected
/// gradient norm drops below `tol`.
template <typename Func, typename Grad>
Eigen::VectorXd minimize_convex_box(Func&& f, Grad&& grad, const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper, double tol,
                                    int max_iter = 10000,
                                    const Eigen::VectorXd* warm_start = nullptr) {
  const Eigen::Index n = lower.size();
  if (upper.size() != n) throw std::invalid_argument("minimize_convex_box: bound size mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (lower[i] > upper[i]) throw std::invalid_argument("minimize_convex_box: lower > upper");

  auto clamp = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::min(std::max(v[i], lower[i]), upper[i]);
    return v;
  };
  Eigen::VectorXd x = warm_start ? clamp(*warm_start) : clamp(0.5 * (lower + upper));
  double fx = f(x);
  Eigen::VectorXd g = grad(x);
  if (!std::isfinite(fx) || !g.allFinite())
    throw NumericalDomainError("minimize_convex_box: non-finite objective or gradient");

  double box_diag = (upper - lower).norm();
  double step = (g.norm() > 0) ? std::max(1e-30, 0.1 * std::max(box_diag, 1e-30) / (1.0 + g.norm()))
                               : 1.0;
  Eigen::VectorXd x_prev = x, g_prev = g;
  for (int it = 0; it < max_iter; ++it) {
    // projected-gradient optimality measure
    Eigen::VectorXd pg = x - clamp(x - g);
    if (pg.norm() <= tol) break;

    double t = step;
    Eigen::VectorXd x_new, d;
    double f_new = 0.0;
    bool ok = false;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = clamp(x - t * g);
      d = x_new - x;
      if (d.norm() == 0.0) { ok = false; break; }
      f_new = f(x_new);
      if (!std::isfinite(f_new))
        throw NumericalDomainError("minimize_convex_box: non-finite objective");
      if (f_new <= fx + 1e-4 * g.dot(d) + 1e-30) { ok = true; break; }
      t *= 0.5;
    }
    if (!ok) break;  // no progress possible at this scale

    x_prev = x; g_prev = g;
    x = x_new; fx = f_new;
    g = grad(x);
    if (!g.allFinite()) throw NumericalDomainError("minimize_convex_box: non-finite gradient");

    Eigen::VectorXd dx = x - x_prev, dg = g - g_prev;
    double dxdg = dx.dot(dg);
    if (dxdg > 1e-300) {
      step = std::min(std::max(dx.squaredNorm() / dxdg, 1e-30), 1e30);
    } else {
      step = t * 2.0;
    }
  }
  return x;
}

enum class CutKind { Objective, Feasibility };

struct CutOracleResult {
  CutKind kind = CutKind::Objective;
  double value = 0.0;            // objective value, valid for objective cuts
  Eigen::VectorXd subgradient;   // ascent direction (objective) or violated-constraint gradient
};

struct EllipsoidState {
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;  // symmetric positive definite
  int iteration = 0;
};

struct EllipsoidResult {
  Eigen::VectorXd point;
  double value = -std::numeric_limits<double>::infinity();
  bool tol_met = false;
  int iterations = 0;
};

/// Ellipsoid method for nonsmooth concave maximization with feasibility cuts.
/// The optimum must lie in the ball of radius `radius0` around `center0`.
/// Stops when the sliced-ellipsoid bound sqrt(g'Pg) <= tol*max(1,|best|).
template <typename Oracle>
EllipsoidResult ellipsoid_max(Oracle&& oracle, const Eigen::VectorXd& center0, double radius0,
                              double tol, int max_iter,
                              const std::function<void(const EllipsoidState&)>& observer = nullptr) {
  const Eigen::Index n = center0.size();
  if (n < 1) throw std::invalid_argument("ellipsoid_max: empty center");
  if (!(radius0 > 0) || !(tol > 0)) throw std::invalid_argument("ellipsoid_max: radius0, tol > 0");

  EllipsoidState st;
  st.center = center0;
  st.shape = radius0 * radius0 * Eigen::MatrixXd::Identity(n, n);

  EllipsoidResult res;
  res.point = center0;

  for (int it = 0; it < max_iter; ++it) {
    st.iteration = it;
    if (observer) observer(st);
    CutOracleResult cut = oracle(st.center);
    if (!cut.subgradient.allFinite() || cut.subgradient.size() != n)
      throw NumericalDomainError("ellipsoid_max: bad subgradient from oracle");

    Eigen::VectorXd a;  // cut normal: keep {y : a'(y - x) <= 0}
    if (cut.kind == CutKind::Objective) {
      if (cut.value > res.value) { res.value = cut.value; res.point = st.center; }
      if (cut.subgradient.norm() == 0.0) {  // exact stationarity
        res.tol_met = true;
        res.iterations = it + 1;
        return res;
      }
      double width = std::sqrt(std::max(0.0, cut.subgradient.dot(st.shape * cut.subgradient)));
      if (width <= tol * std::max(1.0, std::abs(res.value))) {
        res.tol_met = true;
        res.iterations = it + 1;
        return res;
      }
      a = -cut.subgradient;  // better points satisfy g'(y-x) >= 0
    } else {
      a = cut.subgradient;
    }

    double aPa = a.dot(st.shape * a);
    if (!(aPa > 0) || !std::isfinite(aPa)) break;  // ellipsoid degenerate
    double den = std::sqrt(aPa);
    Eigen::VectorXd Pa = st.shape * a / den;

    if (n == 1) {
      // 1-D ellipsoid update degenerates to interval halving
      st.center -= 0.5 * Pa;
      st.shape *= 0.25;
    } else {
      double nn = static_cast<double>(n);
      st.center -= Pa / (nn + 1.0);
      st.shape = (nn * nn / (nn * nn - 1.0)) *
                 (st.shape - (2.0 / (nn + 1.0)) * (Pa * Pa.transpose()));
      st.shape = 0.5 * (st.shape + st.shape.transpose());
    }
    res.iterations = it + 1;
  }
  return res;  // tol_met stays false: iteration budget exhausted
}

}  // namespace fedopt

#endif  // FEDOPT_NUMERICS_HPP
