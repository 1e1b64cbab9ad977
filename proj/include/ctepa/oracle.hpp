#pragma once

// Brute-force reference for the frozen linear system: fixed-step RK4 with
// event location by bisection on a fractional re-step.  Deliberately shares
// no code with the closed forms in the library.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "ctepa/core.hpp"

namespace ctepa::oracle {

struct Point {
  double t = 0.0;
  double w = 0.0;
  double s = 0.0;
};

using Functional = std::function<double(double w, double s)>;

inline Point rk4(double c, double nu, double k, const Point& x, double h) {
  const auto fw = [&](double, double s) { return k * (1.0 - c * s); };
  const auto fs = [&](double w, double s) { return w - nu * s; };
  const double k1w = fw(x.w, x.s), k1s = fs(x.w, x.s);
  const double k2w = fw(x.w + 0.5 * h * k1w, x.s + 0.5 * h * k1s), k2s = fs(x.w + 0.5 * h * k1w, x.s + 0.5 * h * k1s);
  const double k3w = fw(x.w + 0.5 * h * k2w, x.s + 0.5 * h * k2s), k3s = fs(x.w + 0.5 * h * k2w, x.s + 0.5 * h * k2s);
  const double k4w = fw(x.w + h * k3w, x.s + h * k3s), k4s = fs(x.w + h * k3w, x.s + h * k3s);
  return Point{x.t + h, x.w + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w), x.s + h / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)};
}

// Integrate in time direction `dir` until `event` changes sign.  Returns
// nothing if `abort` changes sign first or the time budget runs out.
inline std::optional<Point> run_to_event(double c, double nu, double k, Point x, int dir, const Functional& event,
                                         double h = 1e-3, double t_span = 2000.0, const Functional& abort = {}) {
  const double step = dir > 0 ? h : -h;
  const double e0 = event(x.w, x.s);
  const double a0 = abort ? abort(x.w, x.s) : 0.0;
  const long max_steps = static_cast<long>(t_span / h) + 1;
  for (long n = 0; n < max_steps; ++n) {
    const Point next = rk4(c, nu, k, x, step);
    if (!std::isfinite(next.w) || !std::isfinite(next.s) || std::abs(next.s) > 1e200) return std::nullopt;
    const double e1 = event(next.w, next.s);
    if (e1 == 0.0 || (e1 < 0.0) != (e0 < 0.0)) {
      double lo = 0.0, hi = 1.0;
      for (int i = 0; i < 80 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        const Point trial = rk4(c, nu, k, x, mid * step);
        if ((event(trial.w, trial.s) < 0.0) == (e0 < 0.0)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return rk4(c, nu, k, x, 0.5 * (lo + hi) * step);
    }
    if (abort) {
      const double a1 = abort(next.w, next.s);
      if (a1 != 0.0 && (a1 < 0.0) != (a0 < 0.0)) return std::nullopt;
    }
    x = next;
  }
  return std::nullopt;
}

inline Point flow(double c, double nu, double k, Point x, double t_end, double h = 1e-3) {
  const long n = static_cast<long>(std::ceil(std::abs(t_end - x.t) / h));
  if (n == 0) return x;
  const double step = (t_end - x.t) / static_cast<double>(n);
  for (long i = 0; i < n; ++i) x = rk4(c, nu, k, x, step);
  x.t = t_end;
  return x;
}

// Corners of both constructions obtained purely by integration.  Keys follow
// the serialized names (w1, s2, w3, s4, w_star, wt1, st2, wt3, wt_star).
inline std::map<std::string, double> corners(const ctepa::Params& p, double h = 1e-3) {
  std::map<std::string, double> out;
  const double k = p.k, cm = p.c_minus, cp = p.c_plus, nm = p.nu_minus, np = p.nu_plus;
  const auto s_at = [](double level) { return [level](double, double s) { return s - level; }; };
  const auto line = [](double slope) { return [slope](double w, double s) { return w - slope * s; }; };

  if (auto e1 = run_to_event(cp, np, k, Point{}, -1, s_at(1.0 / cp), h)) {
    out["t1"] = e1->t;
    out["w1"] = e1->w;
    if (auto e2 = run_to_event(cp, nm, k, *e1, -1, line(nm), h, 2000.0)) {
      out["t2"] = e2->t;
      out["s2"] = e2->s;
      if (e2->s > 1.0 / cm) {
        if (auto e3 = run_to_event(cm, nm, k, *e2, -1, s_at(1.0 / cm), h)) {
          out["t3"] = e3->t;
          out["w3"] = e3->w;
          if (e3->w > np / cm) {
            if (auto e4 = run_to_event(cm, np, k, *e3, -1, line(np), h, 2000.0)) {
              out["s4"] = e4->s;
              out["t4"] = e4->t;
            }
            if (auto star = run_to_event(cm, np, k, *e3, -1, s_at(0.0), h, 2000.0, line(np))) {
              out["w_star"] = star->w;
            }
          }
        }
      }
    }
  }

  if (auto e1 = run_to_event(cm, nm, k, Point{}, -1, s_at(1.0 / cm), h)) {
    out["wt1"] = e1->w;
    if (auto e2 = run_to_event(cm, np, k, *e1, -1, line(np), h, 2000.0)) {
      out["st2"] = e2->s;
      if (auto e3 = run_to_event(cp, np, k, *e2, -1, s_at(1.0 / cp), h)) {
        out["wt3"] = e3->w;
        if (auto star = run_to_event(cp, nm, k, *e3, -1, s_at(0.0), h, 2000.0, line(nm))) {
          out["wt_star"] = star->w;
        }
      }
    }
  }
  return out;
}

}  // namespace ctepa::oracle
