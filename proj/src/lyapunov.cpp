#include "ctepa/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ctepa/detail/format.hpp"
#include "ctepa/detail/roots.hpp"
#include "ctepa/errors.hpp"

namespace ctepa {

namespace {

// Monotone cubic (Fritsch-Carlson) node slopes for y(x), x strictly increasing.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  d[0] = delta[0];
  d[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
    const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
    d[i] = (w0 + w1) / (w0 / delta[i - 1] + w1 / delta[i]);
  }
  return d;
}

double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double u = (x - x0) / h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1;
}

}  // namespace

LyapunovTable::LyapunovTable(Family family, double c, double nu, double k, Anchor anchor, Sweep sweep,
                             double s_limit, std::string region, int points)
    : family_(family),
      anchor_(anchor),
      region_(std::move(region)),
      path_(c, nu, k,
            State2<double>(nu * anchor.s + (family == Family::P ? -1.0 : 1.0) * std::sqrt(2.0 * std::max(0.0, anchor.value)),
                           anchor.s),
            0.0) {
  if (!(anchor.value >= 0.0)) throw DomainError("lyapunov table: negative anchor value");
  if (points < 2) throw ConfigError("lyapunov table: need at least two grid points");
  const bool increasing = sweep == Sweep::IncreasingS;
  const double s_sign = increasing ? 1.0 : -1.0;
  direction_ = ((family == Family::P) == increasing) ? -1 : 1;
  const double dir = direction_;

  const bool starts_at_zero = anchor.value == 0.0;
  if (starts_at_zero) {
    const double curvature = k * (1.0 - c * anchor.s);
    if (!(s_sign * curvature > 0.0)) throw DomainError("lyapunov table: anchor on the line cannot sweep this way");
  }
  if (std::isfinite(s_limit) && !(s_sign * (s_limit - anchor.s) > 0.0)) {
    throw DomainError("lyapunov table: s limit lies behind the anchor");
  }

  const auto beyond = [&](double tau, double level) { return s_sign * (path_.s(tau) - level) >= 0.0; };
  const double scale = 1.0 / (0.5 * nu + std::sqrt(k * c));

  double tau_end = 0.0;
  bool ends_at_zero = false;
  bool unbounded = false;
  const std::optional<double> turn = path_.next_turn(direction_);
  if (turn && !(std::isfinite(s_limit) && beyond(*turn, s_limit))) {
    tau_end = *turn;
    ends_at_zero = true;
  } else {
    double hi = turn ? *turn : dir * scale;
    if (!turn) {
      const double target = std::isfinite(s_limit) ? s_limit : anchor.s + s_sign * 10.0 * (1.0 + std::abs(anchor.s));
      for (int i = 0; i < 200 && !beyond(hi, target) && std::isfinite(path_.s(hi)); ++i) hi *= 2.0;
      if (!std::isfinite(s_limit)) {
        unbounded = beyond(hi, target);
        s_limit = target;
      }
    }
    if (beyond(hi, s_limit)) {
      const double lo = std::min(0.0, hi), up = std::max(0.0, hi);
      tau_end = detail::safeguarded_newton([&](double t) { return path_.s(t) - s_limit; },
                                           [&](double t) { return path_.drift(t); }, lo, up, hi / 2,
                                           1e-15 * (1.0 + std::abs(hi)));
    } else {
      // Forward sweeps without a turn settle onto the equilibrium.
      tau_end = hi;
    }
  }

  // Grid in trajectory time, clustered quadratically at ends where the value
  // vanishes, plus a geometric refinement towards those ends.
  std::vector<double> taus;
  taus.reserve(static_cast<std::size_t>(points) + 64);
  const double pi = std::numbers::pi;
  for (int j = 0; j < points; ++j) {
    const double u = static_cast<double>(j) / (points - 1);
    double g = u;
    if (starts_at_zero && ends_at_zero) {
      g = u - std::sin(2 * pi * u) / (2 * pi);
    } else if (starts_at_zero) {
      g = 1.0 - std::cos(pi * u / 2);
    } else if (ends_at_zero) {
      g = std::sin(pi * u / 2);
    }
    taus.push_back(tau_end * g);
  }
  for (int j = 8; j <= 26; ++j) {
    const double f = std::ldexp(1.0, -j);
    if (starts_at_zero) taus.push_back(tau_end * f);
    if (ends_at_zero) taus.push_back(tau_end * (1.0 - f));
  }
  std::sort(taus.begin(), taus.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });

  for (double tau : taus) {
    const double s = path_.s(tau);
    if (!s_.empty() && !(s_sign * (s - s_.back()) > 0.0)) continue;
    s_.push_back(s);
    t_.push_back(tau);
  }
  if (s_.size() < 2) throw DomainError("lyapunov table: degenerate domain");
  if (!increasing) {
    std::reverse(s_.begin(), s_.end());
    std::reverse(t_.begin(), t_.end());
  }
  value_.reserve(s_.size());
  for (double tau : t_) {
    const double d = path_.drift(tau);
    value_.push_back(0.5 * d * d);
  }
  if (starts_at_zero) value_[increasing ? 0 : value_.size() - 1] = 0.0;
  if (ends_at_zero) value_[increasing ? value_.size() - 1 : 0] = 0.0;
  slope_ = monotone_slopes(s_, t_);

  s_lo_ = s_.front();
  s_hi_ = s_.back();
  if (unbounded) {
    if (increasing) {
      unbounded_hi_ = true;
      s_hi_ = std::numeric_limits<double>::infinity();
    } else {
      unbounded_lo_ = true;
      s_lo_ = -std::numeric_limits<double>::infinity();
    }
  }
  if (starts_at_zero) zeros_.push_back(anchor.s);
  if (ends_at_zero) zeros_.push_back(path_.s(tau_end));
}

double LyapunovTable::slack(double s) const {
  // Closed-form evaluation far from equilibrium loses digits in proportion
  // to the largest s the trajectory covers.
  return 1e-10 * (1.0 + std::abs(s)) + 1e-12 * std::max(std::abs(s_.front()), std::abs(s_.back()));
}

bool LyapunovTable::contains(double s) const { return s >= s_lo_ - slack(s) && s <= s_hi_ + slack(s); }

double LyapunovTable::clamp_to_domain(double s) const {
  if (!contains(s)) {
    throw DomainError("lyapunov table " + region_ + ": s = " + detail::format_double(s) + " outside [" +
                      detail::format_double(s_lo_) + ", " + detail::format_double(s_hi_) + "]");
  }
  return std::clamp(s, s_lo_, s_hi_);
}

double LyapunovTable::invert(double s) const {
  s = clamp_to_domain(s);
  const auto f = [&](double tau) { return path_.s(tau) - s; };
  const auto df = [&](double tau) { return path_.drift(tau); };
  if (s >= s_.front() && s <= s_.back()) {
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - s_.begin()) - 1));
    if (i + 1 >= s_.size()) i = s_.size() - 2;
    if (s == s_[i]) return t_[i];
    if (s == s_[i + 1]) return t_[i + 1];
    const double guess = hermite(s_[i], s_[i + 1], t_[i], t_[i + 1], slope_[i], slope_[i + 1], s);
    const double lo = std::min(t_[i], t_[i + 1]), hi = std::max(t_[i], t_[i + 1]);
    return detail::safeguarded_newton(f, df, lo, hi, guess, 1e-15 * (1.0 + std::abs(hi)));
  }
  // Beyond the sampled window of an unbounded domain.
  const bool above = s > s_.back();
  double from = above ? t_.back() : t_.front();
  double span = std::max(std::abs(from), 1.0);
  double to = from + direction_ * span;
  for (int i = 0; i < 400 && (above ? path_.s(to) < s : path_.s(to) > s); ++i) {
    from = to;
    span *= 2.0;
    to = from + direction_ * span;
  }
  return detail::safeguarded_newton(f, df, std::min(from, to), std::max(from, to), 0.5 * (from + to),
                                    1e-15 * (1.0 + std::abs(to)));
}

double LyapunovTable::time_at(double s) const { return invert(s); }

double LyapunovTable::value(double s) const {
  const double d = path_.drift(invert(s));
  return 0.5 * d * d;
}

double LyapunovTable::root(double s) const { return std::abs(path_.drift(invert(s))); }

double LyapunovTable::curve_w(double s) const {
  const double r = root(s);
  return nu() * s + (family_ == Family::P ? -r : r);
}

LyapunovEval eval_L(const LyapunovTable& table, double w, double s) {
  const double r = table.root(s);
  const double base = w - table.nu() * s;
  return LyapunovEval{table.family() == Family::P ? base + r : base - r, table.region()};
}

double level_set_drift(double c, double nu, double k, const LyapunovTable& table, double w0, double s0, double T,
                       int samples) {
  const LocalTrajectory<double> flow(c, nu, k, State2<double>(w0, s0), 0.0);
  double worst = 0.0;
  const int n = std::max(samples, 2);
  for (int i = 0; i < n; ++i) {
    const double t = T * static_cast<double>(i) / (n - 1);
    const State2<double> x = flow(t);
    if (!table.contains(x[1])) throw DomainError("level_set_drift: trajectory exits table domain");
    worst = std::max(worst, std::abs(eval_L(table, x[0], x[1]).value));
  }
  return worst;
}

void write_csv(std::ostream& os, const LyapunovTable& table) {
  os << "s,value\n";
  for (std::size_t i = 0; i < table.s_grid().size(); ++i) {
    os << detail::format_double(table.s_grid()[i]) << ',' << detail::format_double(table.value_grid()[i]) << '\n';
  }
}

}  // namespace ctepa
