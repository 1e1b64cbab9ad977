#include "ctepa/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "ctepa/detail/dopri5.hpp"
#include "ctepa/detail/format.hpp"
#include "ctepa/detail/roots.hpp"
#include "ctepa/errors.hpp"
#include "ctepa/parallel.hpp"

namespace ctepa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundSlack = 1e-12;

std::string fmt(double v) { return detail::format_double(v); }

}  // namespace

// ---------------------------------------------------------------------------
// Coefficient paths

CoefficientPath::CoefficientPath(Params bounds, Function fn, std::string name, std::vector<double> breakpoints)
    : bounds_(validate(bounds)), fn_(std::move(fn)), name_(std::move(name)), breakpoints_(std::move(breakpoints)) {
  std::sort(breakpoints_.begin(), breakpoints_.end());
}

Coefficients CoefficientPath::operator()(double t) const {
  const Coefficients v = fn_(t);
  const auto outside = [](double x, double lo, double hi) {
    return !(x >= lo - kBoundSlack * (1.0 + std::abs(lo)) && x <= hi + kBoundSlack * (1.0 + std::abs(hi)));
  };
  if (outside(v.c, bounds_.c_minus, bounds_.c_plus)) {
    throw DomainError("coefficient path " + name_ + ": c(" + fmt(t) + ") = " + fmt(v.c) + " outside [" +
                      fmt(bounds_.c_minus) + ", " + fmt(bounds_.c_plus) + "]");
  }
  if (outside(v.nu, bounds_.nu_minus, bounds_.nu_plus)) {
    throw DomainError("coefficient path " + name_ + ": nu(" + fmt(t) + ") = " + fmt(v.nu) + " outside [" +
                      fmt(bounds_.nu_minus) + ", " + fmt(bounds_.nu_plus) + "]");
  }
  return v;
}

CoefficientPath constant_path(const Params& p, double c, double nu) {
  return CoefficientPath(p, [c, nu](double) { return Coefficients{c, nu}; }, "constant");
}

CoefficientPath extreme_path(const Params& p, Extreme c, Extreme nu) {
  const double cv = c == Extreme::Plus ? p.c_plus : p.c_minus;
  const double nv = nu == Extreme::Plus ? p.nu_plus : p.nu_minus;
  std::string name = "extreme(";
  name += c == Extreme::Plus ? "c+," : "c-,";
  name += nu == Extreme::Plus ? "nu+)" : "nu-)";
  return CoefficientPath(p, [cv, nv](double) { return Coefficients{cv, nv}; }, name);
}

CoefficientPath sine_path(const Params& p, double omega_c, double omega_nu, double phase) {
  const double cm = 0.5 * (p.c_minus + p.c_plus), ca = 0.5 * (p.c_plus - p.c_minus);
  const double nm = 0.5 * (p.nu_minus + p.nu_plus), na = 0.5 * (p.nu_plus - p.nu_minus);
  const Params b = p;
  return CoefficientPath(
      p,
      [=](double t) {
        return Coefficients{std::clamp(cm + ca * std::sin(omega_c * t + phase), b.c_minus, b.c_plus),
                            std::clamp(nm + na * std::sin(omega_nu * t + 2.0 * phase), b.nu_minus, b.nu_plus)};
      },
      "sine");
}

CoefficientPath random_switching_path(const Params& p, std::uint64_t seed, double mean_dwell, double horizon) {
  if (!(mean_dwell > 0.0) || !(horizon > 0.0)) throw ConfigError("random switching: dwell and horizon must be positive");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> dwell(1.0 / mean_dwell);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto draw = [&](double lo, double hi) {
    const double r = u(rng);
    if (r < 0.25) return lo;
    if (r < 0.5) return hi;
    return lo + (hi - lo) * u(rng);
  };
  std::vector<double> times{0.0};
  std::vector<Coefficients> values{{draw(p.c_minus, p.c_plus), draw(p.nu_minus, p.nu_plus)}};
  for (double t = dwell(rng); t < horizon; t += dwell(rng)) {
    times.push_back(t);
    values.push_back({draw(p.c_minus, p.c_plus), draw(p.nu_minus, p.nu_plus)});
  }
  std::vector<double> breakpoints(times.begin() + 1, times.end());
  return CoefficientPath(
      p,
      [times, values](double t) {
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
        return values[i];
      },
      "random:" + std::to_string(seed), std::move(breakpoints));
}

CoefficientPath random_path(const Params& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pick = u(rng);
  if (pick < 0.2) {
    return extreme_path(p, u(rng) < 0.5 ? Extreme::Minus : Extreme::Plus,
                        u(rng) < 0.5 ? Extreme::Minus : Extreme::Plus);
  }
  if (pick < 0.5) return sine_path(p, 0.2 + 3.0 * u(rng), 0.2 + 3.0 * u(rng), 2.0 * std::numbers::pi * u(rng));
  return random_switching_path(p, rng(), 0.05 + 2.0 * u(rng));
}

CoefficientPath path_from_mode(const Params& p, const std::string& mode) {
  if (mode == "const-minmax") return extreme_path(p, Extreme::Minus, Extreme::Plus);
  if (mode == "sine") return sine_path(p);
  if (mode.rfind("random:", 0) == 0) {
    const std::string digits = mode.substr(7);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("coeff-mode: random seed must be a non-negative integer");
    }
    return random_switching_path(p, std::stoull(digits));
  }
  throw ConfigError("coeff-mode must be const-minmax, sine or random:<seed>, got '" + mode + "'");
}

// ---------------------------------------------------------------------------
// Integration driver

namespace {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

template <int N>
struct EventFn {
  std::string name;
  std::function<double(const Vec<N>&)> g;
  bool terminal = false;
};

struct DriverStats {
  std::size_t accepted = 0, rejected = 0;
  bool terminated = false;
};

// Advances y' = rhs(t, y) from t0 to T.  `limit(y, f)` caps the step size;
// `record(t, y)` receives every accepted step end and every located event;
// `on_event(index, direction, t, y)` is called for located events in time order.
template <int N, typename Rhs, typename Limit, typename Record, typename OnEvent>
DriverStats drive(Rhs&& rhs_at, double t0, Vec<N> y, double T, const SimControls& ctl,
                  const std::vector<double>& breakpoints, const std::vector<EventFn<N>>& events, Limit&& limit,
                  Record&& record, OnEvent&& on_event) {
  DriverStats stats;
  double t = t0;
  // Inside a step that ends on a switching time the coefficients are taken
  // just before it, so every stage sees the same piece.
  double clamp_t = kInf;
  const auto rhs = [&](double tau, const Vec<N>& x) { return rhs_at(std::min(tau, clamp_t), x); };
  Vec<N> f = rhs(t, y);
  double h = std::min(ctl.h_init, ctl.h_max);
  auto bp = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  record(t, y);

  while (t < T) {
    if (stats.accepted + stats.rejected >= ctl.max_steps) {
      throw NumericalError("integrator: step budget exhausted at t = " + fmt(t));
    }
    double hh = std::min({h, ctl.h_max, limit(y, f), T - t});
    // Never leave a sliver before T that is too short to step over.
    if (T - t - hh < 1e-12 * std::max(1.0, std::abs(T))) hh = T - t;
    bool to_break = false;
    if (bp != breakpoints.end() && *bp < T && t + hh >= *bp) {
      hh = *bp - t;
      to_break = true;
    }
    const double h_min = 1e-14 * std::max(1.0, std::abs(t));
    if (!(hh > h_min)) {
      if (to_break && hh >= 0.0) {
        // Already on the switching time.
        t = *bp;
        ++bp;
        clamp_t = kInf;
        f = rhs(t, y);
        continue;
      }
      throw NumericalError("integrator: step size underflow (h = " + fmt(hh) + ") at t = " + fmt(t));
    }
    clamp_t = to_break ? std::nextafter(*bp, -kInf) : kInf;
    const auto step = detail::dopri5_step<N>(rhs, t, y, f, hh, ctl.rtol, ctl.atol);
    if (!step.y1.allFinite() || !(step.error <= 1.0)) {
      ++stats.rejected;
      h = hh * (std::isfinite(step.error) ? detail::dopri5_factor(step.error) : 0.25);
      h = std::min(h, 0.9 * hh);
      continue;
    }
    ++stats.accepted;

    struct Hit {
      double t;
      std::size_t index;
      int direction;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double g0 = events[i].g(step.y0), g1 = events[i].g(step.y1);
      if (g0 == 0.0 || !((g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0))) continue;
      const double te = g1 == 0.0 ? step.t1()
                                  : detail::bisect([&](double tau) { return events[i].g(step.at(tau)); }, step.t0,
                                                   step.t1(), ctl.event_tol);
      hits.push_back({te, i, g1 > g0 ? 1 : -1});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.t < b.t; });
    bool stop = false;
    for (const Hit& hit : hits) {
      const Vec<N> ye = hit.t >= step.t1() ? step.y1 : step.at(hit.t);
      record(hit.t, ye);
      on_event(hit.index, hit.direction, hit.t, ye);
      if (events[hit.index].terminal) {
        stop = true;
        break;
      }
    }
    if (stop) {
      stats.terminated = true;
      break;
    }
    t = step.t1();
    y = step.y1;
    record(t, y);
    if (to_break) {
      t = *bp;
      ++bp;
      clamp_t = kInf;
      f = rhs(t, y);
    } else {
      f = step.f1;
    }
    h = hh * detail::dopri5_factor(step.error);
  }
  return stats;
}

}  // namespace

Trajectory simulate_ws(const Params& p, const CoefficientPath& coeffs, double w0, double s0, double T,
                       const SimControls& ctl) {
  validate(p);
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw ConfigError("simulate: s0 must be positive and finite");
  if (!std::isfinite(w0)) throw ConfigError("simulate: w0 must be finite");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("simulate: T must be positive and finite");
  if (!(ctl.s_eps > 0.0)) throw ConfigError("simulate: s_eps must be positive");
  const Params& b = coeffs.bounds();
  if (b.c_minus < p.c_minus || b.c_plus > p.c_plus || b.nu_minus < p.nu_minus || b.nu_plus > p.nu_plus) {
    throw ConfigError("simulate: coefficient path bounds exceed the parameter bounds");
  }

  Trajectory traj;
  traj.params = p;
  const double k = p.k;
  const auto rhs = [&](double t, const Vec<2>& x) {
    const Coefficients cf = coeffs(t);
    return Vec<2>(k * (1.0 - cf.c * x[1]), x[0] - cf.nu * x[1]);
  };

  std::vector<EventFn<2>> events;
  const auto line = [&](std::string name, double slope) {
    events.push_back({std::move(name), [slope](const Vec<2>& x) { return x[0] - slope * x[1]; }, false});
  };
  const auto level = [&](std::string name, double value) {
    events.push_back({std::move(name), [value](const Vec<2>& x) { return x[1] - value; }, false});
  };
  line("w=nu+s", p.nu_plus);
  line("w=nu-s", p.nu_minus);
  level("s=1/c+", 1.0 / p.c_plus);
  level("s=1/c-", 1.0 / p.c_minus);
  events.push_back({"w=0", [](const Vec<2>& x) { return x[0]; }, false});
  const CornerSet cs = compute_corners(p);
  if (cs.sub.step2) level("s=s2", cs.sub.step2->s);
  const double st1 = 1.0 / p.c_minus;
  const double s_star = cs.sup.step2 ? 0.5 * (st1 + cs.sup.step2->s) : st1 + 1.0;
  if (cs.sup.step2) level("s=s~2", cs.sup.step2->s);
  level("s=s~*", s_star);
  level("s=s~**", 0.5 / p.c_plus);
  const double s_eps = ctl.s_eps;
  events.push_back({"cutoff", [s_eps](const Vec<2>& x) { return x[1] - s_eps; }, true});
  const std::size_t cutoff_index = events.size() - 1;

  const auto limit = [](const Vec<2>& x, const Vec<2>& f) {
    // Approach s = 0 geometrically so the cutoff is never overshot.
    return f[1] < 0.0 ? 0.5 * x[1] / -f[1] : kInf;
  };
  const auto record = [&](double t, const Vec<2>& x) {
    if (!traj.samples.empty() && !(t > traj.samples.back().t)) return;
    traj.samples.push_back({t, x[0], x[1]});
  };
  const auto on_event = [&](std::size_t i, int dir, double t, const Vec<2>& x) {
    if (i == cutoff_index && dir > 0) return;
    traj.events.push_back({t, x[0], x[1], events[i].name, dir});
  };

  const DriverStats stats =
      drive<2>(rhs, 0.0, Vec<2>(w0, s0), T, ctl, coeffs.breakpoints(), events, limit, record, on_event);
  traj.accepted = stats.accepted;
  traj.rejected = stats.rejected;

  if (stats.terminated) {
    const auto n = traj.samples.size();
    const Sample& c = traj.samples.back();
    BlowupEvent ev;
    ev.t_cutoff = c.t;
    // s reaches zero with finite slope: compare a quadratic through the last
    // three samples against the secant of the last two.
    const Sample& b1 = traj.samples[n >= 2 ? n - 2 : n - 1];
    const double slope = n >= 2 ? (c.s - b1.s) / (c.t - b1.t) : c.w;
    const double t_lin = c.t - c.s / slope;
    double t_quad = t_lin;
    if (n >= 3) {
      const Sample& a = traj.samples[n - 3];
      const auto q = [&](double t) {
        const double la = (t - b1.t) * (t - c.t) / ((a.t - b1.t) * (a.t - c.t));
        const double lb = (t - a.t) * (t - c.t) / ((b1.t - a.t) * (b1.t - c.t));
        const double lc = (t - a.t) * (t - b1.t) / ((c.t - a.t) * (c.t - b1.t));
        return a.s * la + b1.s * lb + c.s * lc;
      };
      const double span = std::max(4.0 * (t_lin - c.t), 1e-300);
      if (q(c.t) > 0.0 && q(c.t + span) < 0.0) t_quad = detail::bisect(q, c.t, c.t + span, 1e-16 * (1.0 + c.t));
    }
    ev.t_star = t_quad;
    ev.t_star_error = std::abs(t_quad - t_lin);
    const Coefficients cf = coeffs(c.t);
    ev.w_star = c.w + k * (1.0 - cf.c * c.s) * (ev.t_star - c.t);
    traj.blowup = ev;
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Comparison principles

std::string_view to_string(Area a) {
  switch (a) {
    case Area::R1: return "R1";
    case Area::R2: return "R2";
    case Area::R3: return "R3";
    case Area::R4: return "R4";
    case Area::Rt1: return "Rt1";
    case Area::Rt2: return "Rt2";
    case Area::Rt3: return "Rt3";
    case Area::Rt4: return "Rt4";
  }
  return "?";
}

namespace {

bool tilde(Area a) { return a == Area::Rt1 || a == Area::Rt2 || a == Area::Rt3 || a == Area::Rt4; }

std::size_t curve_index(Area a) {
  switch (a) {
    case Area::R1:
    case Area::Rt1: return 0;
    case Area::R2:
    case Area::Rt2: return 1;
    case Area::R3:
    case Area::Rt3: return 2;
    case Area::R4:
    case Area::Rt4: return 3;
  }
  return 0;
}

// +1 when the principle keeps L positive (or nonnegative), -1 for negative.
int preserved_sign(Area a) {
  switch (a) {
    case Area::R1:
    case Area::R2:
    case Area::Rt3:
    case Area::Rt4: return 1;
    default: return -1;
  }
}

}  // namespace

bool in_area(const Region& region, Area a, double w, double s, double tol) {
  const Params& p = region.corners().params;
  const double eps = tol * (1.0 + std::abs(w) + std::abs(s));
  const auto below = [&](double slope) { return w <= slope * s + eps; };
  const auto above = [&](double slope) { return w >= slope * s - eps; };
  const bool capped = region.bounded();
  const double cap = region.cap();
  if (s < -eps) return false;
  switch (a) {
    case Area::R1: return s <= 1.0 / p.c_plus + eps && below(p.nu_plus);
    case Area::R2: return s >= 1.0 / p.c_plus - eps && below(p.nu_minus);
    case Area::R3: return s >= 1.0 / p.c_minus - eps && above(p.nu_minus);
    case Area::R4: return s <= 1.0 / p.c_minus + eps && above(p.nu_plus);
    case Area::Rt1: return s <= 1.0 / p.c_minus + eps && below(p.nu_minus);
    case Area::Rt2: return s >= 1.0 / p.c_minus - eps && below(p.nu_plus) && (!capped || s <= cap + eps);
    case Area::Rt3: return s >= 1.0 / p.c_plus - eps && above(p.nu_plus) && s <= cap + eps;
    case Area::Rt4: return s <= 1.0 / p.c_plus + eps && above(p.nu_minus);
  }
  return false;
}

std::optional<double> area_L(const Thresholds& th, Area a, double w, double s) {
  const Region* region = tilde(a) ? &th.supercritical() : (th.subcritical() ? &*th.subcritical() : nullptr);
  if (!region) return std::nullopt;
  const std::size_t i = curve_index(a);
  if (i >= region->curves().size()) return std::nullopt;
  const LyapunovTable& table = region->curves()[i].table;
  if (!table.contains(s)) return std::nullopt;
  return eval_L(table, w, s).value;
}

ComparisonReport check_comparison(const Trajectory& traj, const Thresholds& th) {
  ComparisonReport report;
  std::vector<Area> areas;
  if (th.subcritical()) {
    areas.insert(areas.end(), {Area::R1, Area::R2});
    if (th.subcritical()->bounded()) areas.insert(areas.end(), {Area::R3, Area::R4});
  }
  areas.insert(areas.end(), {Area::Rt1, Area::Rt2});
  if (th.supercritical().bounded()) areas.insert(areas.end(), {Area::Rt3, Area::Rt4});

  const auto& xs = traj.samples;
  for (Area a : areas) {
    const Region& region = tilde(a) ? th.supercritical() : *th.subcritical();
    const int sign = preserved_sign(a);
    const bool strict = !tilde(a);
    std::size_t i = 0;
    while (i < xs.size()) {
      if (!in_area(region, a, xs[i].w, xs[i].s)) {
        ++i;
        continue;
      }
      Episode ep;
      ep.area = a;
      ep.first = i;
      while (i + 1 < xs.size() && in_area(region, a, xs[i + 1].w, xs[i + 1].s)) ++i;
      ep.last = i;
      ep.t_entry = xs[ep.first].t;
      ep.t_exit = xs[ep.last].t;
      const std::optional<double> entry = area_L(th, a, xs[ep.first].w, xs[ep.first].s);
      ep.L_entry = entry.value_or(std::numeric_limits<double>::quiet_NaN());
      ep.L_min = ep.L_max = ep.L_entry;
      ep.hypothesis = entry && (strict ? sign * *entry > 0.0 : sign * *entry >= 0.0);
      for (std::size_t j = ep.first; j <= ep.last; ++j) {
        const std::optional<double> L = area_L(th, a, xs[j].w, xs[j].s);
        if (!L) {
          // Leaving the table's domain is only possible once the sign is lost,
          // unless the sample already sits across the area's edge.
          if (ep.hypothesis && in_area(region, a, xs[j].w, xs[j].s, 0.0)) ep.violated = true;
          continue;
        }
        ep.L_min = std::min(ep.L_min, *L);
        ep.L_max = std::max(ep.L_max, *L);
        if (ep.hypothesis && sign * *L < -1e-7 * (1.0 + std::abs(*L))) ep.violated = true;
      }
      if (ep.hypothesis) ++report.tested;
      if (ep.violated) ++report.violations;
      report.episodes.push_back(ep);
      ++i;
    }
  }
  std::sort(report.episodes.begin(), report.episodes.end(),
            [](const Episode& x, const Episode& y) { return x.first < y.first; });
  return report;
}

// ---------------------------------------------------------------------------
// Blowup certificate

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::A1: return "A1";
    case Stage::A1Left: return "A1-left";
    case Stage::A2: return "A2";
    case Stage::A3: return "A3";
    case Stage::A4: return "A4";
  }
  return "?";
}

namespace {

int ordinal(Stage s) {
  switch (s) {
    case Stage::A1: return 1;
    case Stage::A1Left:
    case Stage::A2: return 2;
    case Stage::A3: return 3;
    case Stage::A4: return 4;
  }
  return 0;
}

}  // namespace

BlowupCertificate certify_blowup(const Trajectory& traj, const Thresholds& th) {
  if (!traj.blowup) throw DomainError("certify_blowup: not blown up");
  const Params& p = traj.params;
  const Region& sup = th.supercritical();
  BlowupCertificate cert;
  const double st1 = 1.0 / p.c_minus;
  cert.s_star = sup.bounded() ? 0.5 * (st1 + sup.cap()) : st1 + 1.0;
  cert.s_star_star = 0.5 / p.c_plus;
  cert.v_w = p.k * (p.c_minus * cert.s_star - 1.0);
  const double nt4_floor = std::min(std::sqrt(p.k / p.c_plus), p.nu_minus / (2.0 * p.c_plus));

  const auto stage_of = [&](double w, double s) {
    if (w > 0.0) {
      if (s >= cert.s_star) return Stage::A2;
      return w <= sup.W_left(s) ? Stage::A1Left : Stage::A1;
    }
    return s > cert.s_star_star ? Stage::A3 : Stage::A4;
  };

  const auto close = [&](StageRecord& r, double t_exit) {
    r.t_exit = t_exit;
    const double residence = r.t_exit - r.t_entry;
    switch (r.stage) {
      case Stage::A1:
        r.bound = r.min_ds > 0.0 ? cert.s_star / r.min_ds : kInf;
        r.within_bound = r.min_ds > 0.0 && r.case_bounds;
        break;
      case Stage::A1Left: r.bound = kInf; break;
      case Stage::A2: r.bound = r.w_entry / cert.v_w; break;
      case Stage::A3: r.bound = 2.0 * p.c_plus * r.s_entry / p.nu_minus; break;
      case Stage::A4: r.bound = 2.0 * std::abs(r.w_entry) / p.k; break;
    }
    if (std::isfinite(r.bound)) r.within_bound = r.within_bound && residence <= r.bound * (1.0 + 1e-9) + 1e-9;
    cert.stages.push_back(r);
  };

  std::optional<StageRecord> current;
  for (const Sample& x : traj.samples) {
    const Stage st = stage_of(x.w, x.s);
    if (!current || current->stage != st) {
      if (current) close(*current, x.t);
      current = StageRecord{};
      current->stage = st;
      current->t_entry = x.t;
      current->w_entry = x.w;
      current->s_entry = x.s;
      current->min_ds = kInf;
    }
    if (st == Stage::A1) {
      const double lower = x.w - p.nu_plus * x.s;
      current->min_ds = std::min(current->min_ds, lower);
      // Case bounds: on the upper part the right tilde curve keeps s' away from
      // zero; on the lower part the distance to w = nu+ s stays above a constant.
      const double tol = 1e-7 * (1.0 + std::abs(x.w));
      if (sup.bounded() && x.s >= 1.0 / p.c_plus) {
        const LyapunovTable& t3 = sup.curves()[2].table;
        if (t3.contains(x.s) && lower < t3.root(x.s) - tol) current->case_bounds = false;
      } else if (sup.bounded() && lower <= nt4_floor - tol) {
        current->case_bounds = false;
      }
    }
  }
  if (current) close(*current, traj.blowup->t_star);

  int last = 0;
  for (const StageRecord& r : cert.stages) {
    if (ordinal(r.stage) < last) cert.order_ok = false;
    last = std::max(last, ordinal(r.stage));
    if (!r.within_bound) cert.bounds_ok = false;
    cert.total_bound += r.bound;
  }
  cert.total_time = traj.blowup->t_star - traj.samples.front().t;
  cert.w_star_nonpositive = traj.blowup->w_star <= 0.0;
  return cert;
}

// ---------------------------------------------------------------------------
// Monte-Carlo invariance

namespace {

struct RunOutcome {
  bool subcritical = false;
  bool exited = false, nonpositive = false, reached = false, crossed = false, positive_w = false, bounds = false;
  double min_s = kInf;
  std::size_t episodes = 0, violations = 0;
  std::string failure;
};

std::string describe(const char* what, double w0, double s0, const CoefficientPath& path) {
  return std::string(what) + " from (w, s) = (" + fmt(w0) + ", " + fmt(s0) + ") with " + path.name();
}

}  // namespace

InvarianceStats invariance_suite(const Params& p, int n_runs, double T, std::uint64_t seed, double sup_T,
                                 const SimControls& ctl) {
  validate(p);
  if (n_runs < 0) throw ConfigError("invariance suite: n_runs must be non-negative");
  InvarianceStats stats;
  if (n_runs == 0) return stats;
  const Thresholds th(p);
  const bool with_sub = th.subcritical().has_value();
  const std::size_t total = static_cast<std::size_t>(n_runs) * 2;
  std::vector<RunOutcome> outcomes(total);

  parallel_for(total, [&](std::size_t run) {
    RunOutcome& out = outcomes[run];
    const bool sub_run = run < static_cast<std::size_t>(n_runs);
    out.subcritical = sub_run;
    if (sub_run && !with_sub) return;
    std::mt19937_64 rng(seed * 1000003ULL + run);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const CoefficientPath path = random_path(p, rng());
    const auto inside_fraction = [&] { return 1e-4 + (1.0 - 2e-4) * u(rng); };

    double w0 = 0.0, s0 = 0.0;
    if (sub_run) {
      const Region& r = *th.subcritical();
      const double s_top = r.bounded() ? r.cap() : std::max(3.0 / p.c_minus, 2.0 / p.c_plus);
      s0 = s_top * inside_fraction();
      const double left = r.W_left(s0);
      const double right = r.bounded() ? r.W_right(s0) : left + 2.0 * (1.0 + p.nu_plus * s0);
      w0 = left + (right - left) * inside_fraction();
      if (!r.contains(w0, s0)) {
        out.failure = describe("subcritical sample not inside", w0, s0, path);
        out.exited = true;
        return;
      }
      const Trajectory traj = simulate_ws(p, path, w0, s0, T, ctl);
      for (const Sample& x : traj.samples) {
        out.min_s = std::min(out.min_s, x.s);
        if (!(x.s > 0.0)) out.nonpositive = true;
        if (x.s > 0.0 && r.margin(x.w, x.s) < -1e-7 * (1.0 + std::abs(x.w) + std::abs(x.s))) out.exited = true;
      }
      if (traj.blowup) out.nonpositive = true;
      const ComparisonReport cmp = check_comparison(traj, th);
      out.episodes = cmp.tested;
      out.violations = cmp.violations;
      if (out.exited || out.nonpositive || out.violations) out.failure = describe("subcritical run failed", w0, s0, path);
      return;
    }

    const Region& r = th.supercritical();
    const double s_top = r.bounded() ? r.cap() : std::max(3.0 / p.c_minus, 2.0 / p.c_plus);
    const double span = 1.0 + p.nu_plus * s_top;
    const double pick = u(rng);
    if (r.bounded() && pick < 0.2) {
      s0 = r.cap() * (1.0 + u(rng));
      w0 = (2.0 * u(rng) - 1.0) * span;
    } else if (r.bounded() && pick < 0.6) {
      s0 = s_top * inside_fraction();
      w0 = r.W_right(s0) + span * u(rng) * u(rng);
    } else {
      s0 = s_top * inside_fraction();
      w0 = r.W_left(s0) - span * u(rng) * u(rng);
    }
    const Trajectory traj = simulate_ws(p, path, w0, s0, sup_T, ctl);
    for (const Sample& x : traj.samples) {
      if (x.s > 0.0 && r.margin(x.w, x.s) < -1e-7 * (1.0 + std::abs(x.w) + std::abs(x.s))) out.crossed = true;
    }
    out.reached = traj.blowup.has_value();
    if (out.reached) {
      const BlowupCertificate cert = certify_blowup(traj, th);
      out.positive_w = !cert.w_star_nonpositive;
      out.bounds = !cert.bounds_ok || !cert.order_ok;
    }
    const ComparisonReport cmp = check_comparison(traj, th);
    out.episodes = cmp.tested;
    out.violations = cmp.violations;
    if (!out.reached || out.crossed || out.positive_w || out.bounds || out.violations) {
      out.failure = describe("supercritical run failed", w0, s0, path);
    }
  });

  stats.sub_min_s = kInf;
  for (const RunOutcome& o : outcomes) {
    if (o.subcritical) {
      if (!with_sub) continue;
      ++stats.sub_runs;
      stats.sub_exits += o.exited;
      stats.sub_nonpositive_s += o.nonpositive;
      stats.sub_min_s = std::min(stats.sub_min_s, o.min_s);
    } else {
      ++stats.sup_runs;
      stats.sup_reached_cutoff += o.reached;
      stats.sup_crossings += o.crossed;
      stats.sup_positive_w_star += o.positive_w;
      stats.sup_bound_failures += o.bounds;
    }
    stats.episodes += o.episodes;
    stats.comparison_violations += o.violations;
    if (!o.failure.empty() && stats.failures.size() < 5) stats.failures.push_back(o.failure);
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Vacuum

VacuumOutcome simulate_vacuum_G(const Params& p, const CoefficientPath& coeffs, double G0, double T, double g_blow,
                                const SimControls& ctl) {
  validate(p);
  if (!std::isfinite(G0)) throw ConfigError("vacuum: G0 must be finite");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("vacuum: T must be positive and finite");
  if (!(g_blow > 0.0)) throw ConfigError("vacuum: g_blow must be positive");

  VacuumOutcome out;
  out.sup_G = out.inf_G = G0;
  const auto rhs = [&](double t, const Vec<1>& g) {
    const Coefficients cf = coeffs(t);
    return Vec<1>(-g[0] * (g[0] - cf.nu) - p.k * cf.c);
  };
  std::vector<EventFn<1>> events{{"blowup", [g_blow](const Vec<1>& g) { return g[0] + g_blow; }, true}};
  const auto limit = [](const Vec<1>& g, const Vec<1>& f) {
    return std::abs(f[0]) > 0.0 ? 0.1 * (1.0 + std::abs(g[0])) / std::abs(f[0]) : kInf;
  };
  double t_hit = 0.0;
  const auto record = [&](double, const Vec<1>& g) {
    out.sup_G = std::max(out.sup_G, g[0]);
    out.inf_G = std::min(out.inf_G, g[0]);
  };
  const auto on_event = [&](std::size_t, int, double t, const Vec<1>&) { t_hit = t; };
  const DriverStats st = drive<1>(rhs, 0.0, Vec<1>(G0), T, ctl, coeffs.breakpoints(), events, limit, record, on_event);
  if (st.terminated) {
    out.verdict = VacuumVerdict::Blowup;
    // G ~ -1/(t* - t) close to the blowup time.
    out.t_star = t_hit + 1.0 / g_blow;
  }

  const Regime regime = classify_regime(p);
  if (regime.label == Alignment::Weak) {
    out.predicted = VacuumVerdict::Blowup;
  } else if (G0 < g_sharp(p)) {
    out.predicted = VacuumVerdict::Blowup;
  } else if (regime.label == Alignment::Strong && G0 >= g_flat(p)) {
    out.predicted = VacuumVerdict::Bounded;
    // G' < 0 above the larger root of -G^2 + nu+ G - k c-, which dominates
    // every frozen upper equilibrium.
    const double g_plus = 0.5 * (p.nu_plus + std::sqrt(p.nu_plus * p.nu_plus - 4.0 * p.k * p.c_minus));
    out.predicted_upper_bound = std::max(G0, g_plus);
  }
  if (out.predicted) out.consistent = *out.predicted == out.verdict;
  if (out.predicted_upper_bound && out.sup_G > *out.predicted_upper_bound + 1e-6) out.consistent = false;
  return out;
}

}  // namespace ctepa
