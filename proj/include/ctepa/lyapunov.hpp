#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ctepa/local_trajectory.hpp"

namespace ctepa {

// P functions describe curves on the left of the line w = nu s
// (w = nu s - sqrt(2P)); N functions describe curves on its right
// (w = nu s + sqrt(2N)).
enum class Family { P, N };
enum class Sweep { IncreasingS, DecreasingS };

struct Anchor {
  double s = 0.0;
  double value = 0.0;
};

inline constexpr int kDefaultTablePoints = 4096;

// A P or N function represented through the frozen trajectory that traces
// its zero level set: value(s(t)) = (w(t) - nu s(t))^2 / 2.  The grid stores
// samples of that parametrization; evaluation inverts s(t) exactly, starting
// from a monotone cubic interpolation of t(s).
class LyapunovTable {
 public:
  LyapunovTable(Family family, double c, double nu, double k, Anchor anchor, Sweep sweep,
                double s_limit = std::numeric_limits<double>::infinity(), std::string region = {},
                int points = kDefaultTablePoints);

  Family family() const { return family_; }
  double c() const { return path_.c(); }
  double nu() const { return path_.nu(); }
  double k() const { return path_.k(); }
  const Anchor& anchor() const { return anchor_; }
  const std::string& region() const { return region_; }
  const LocalTrajectory<double>& path() const { return path_; }

  double s_lo() const { return s_lo_; }
  double s_hi() const { return s_hi_; }
  bool unbounded_below() const { return unbounded_lo_; }
  bool unbounded_above() const { return unbounded_hi_; }
  // Endpoints at which the value vanishes.
  const std::vector<double>& zeros() const { return zeros_; }

  bool contains(double s) const;
  double value(double s) const;
  double root(double s) const;
  // The curve itself: w = nu s -/+ sqrt(2 value).
  double curve_w(double s) const;
  // Trajectory time at which the curve passes through s.
  double time_at(double s) const;

  const std::vector<double>& s_grid() const { return s_; }
  const std::vector<double>& t_grid() const { return t_; }
  const std::vector<double>& value_grid() const { return value_; }

 private:
  double slack(double s) const;
  double clamp_to_domain(double s) const;
  double invert(double s) const;

  Family family_;
  Anchor anchor_;
  std::string region_;
  LocalTrajectory<double> path_;
  int direction_;  // time direction in which s moves away from the anchor
  double s_lo_, s_hi_;
  bool unbounded_lo_ = false, unbounded_hi_ = false;
  std::vector<double> zeros_;
  std::vector<double> s_, t_, value_, slope_;
};

struct LyapunovEval {
  double value = 0.0;
  std::string region;
};

// w - nu s + sqrt(2P(s)) for P tables, w - nu s - sqrt(2N(s)) for N tables.
LyapunovEval eval_L(const LyapunovTable& table, double w, double s);

// Largest |L| along the frozen flow from (w0, s0) over t in [0, T] (either sign).
double level_set_drift(double c, double nu, double k, const LyapunovTable& table, double w0, double s0, double T,
                       int samples = 1001);

void write_csv(std::ostream& os, const LyapunovTable& table);

}  // namespace ctepa
