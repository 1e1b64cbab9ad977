#include "ctepa/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ctepa/detail/format.hpp"
#include "ctepa/errors.hpp"

namespace ctepa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double anchor_value(double w, double s, double nu) {
  const double d = w - nu * s;
  return 0.5 * d * d;
}

Region assemble_subcritical(const CornerSet& cs, const Admissibility& adm, int points) {
  const Params& p = cs.params;
  const CornerChain& chain = cs.sub;
  if (cs.regime.sub == SubScenario::II && !adm.closes()) throw InadmissibleError(adm.failure());

  const Corner c1 = chain.at(1);
  std::vector<Curve> curves;
  curves.push_back({"C1",
                    LyapunovTable(Family::P, p.c_plus, p.nu_plus, p.k, Anchor{0.0, 0.0}, Sweep::IncreasingS,
                                  1.0 / p.c_plus, "P1++", points),
                    0.0, c1.s});
  curves.push_back({"C2",
                    LyapunovTable(Family::P, p.c_plus, p.nu_minus, p.k,
                                  Anchor{c1.s, anchor_value(c1.w, c1.s, p.nu_minus)}, Sweep::IncreasingS, kInf,
                                  "P2+-", points),
                    c1.s, kInf});
  double cap = kInf;
  if (cs.regime.sub == SubScenario::II) {
    const Corner c2 = chain.at(2), c3 = chain.at(3);
    cap = c2.s;
    curves[1].s_end = cap;
    curves.push_back({"C3",
                      LyapunovTable(Family::N, p.c_minus, p.nu_minus, p.k, Anchor{c2.s, 0.0}, Sweep::DecreasingS,
                                    1.0 / p.c_minus, "N3--", points),
                      c2.s, c3.s});
    curves.push_back({"C4",
                      LyapunovTable(Family::N, p.c_minus, p.nu_plus, p.k,
                                    Anchor{c3.s, anchor_value(c3.w, c3.s, p.nu_plus)}, Sweep::DecreasingS, 0.0,
                                    "N4-+", points),
                      c3.s, 0.0});
  }
  return Region(RegionKind::Subcritical, cs, adm, std::move(curves), 1.0 / p.c_plus, 1.0 / p.c_minus, cap);
}

Region assemble_supercritical(const CornerSet& cs, const Admissibility& adm, int points) {
  const Params& p = cs.params;
  const CornerChain& chain = cs.sup;
  const Corner c1 = chain.at(1);
  std::vector<Curve> curves;
  curves.push_back({"Ct1",
                    LyapunovTable(Family::P, p.c_minus, p.nu_minus, p.k, Anchor{0.0, 0.0}, Sweep::IncreasingS,
                                  1.0 / p.c_minus, "P~1--", points),
                    0.0, c1.s});
  curves.push_back({"Ct2",
                    LyapunovTable(Family::P, p.c_minus, p.nu_plus, p.k,
                                  Anchor{c1.s, anchor_value(c1.w, c1.s, p.nu_plus)}, Sweep::IncreasingS, kInf,
                                  "P~2-+", points),
                    c1.s, kInf});
  double cap = kInf;
  if (cs.regime.sup == SupScenario::IV) {
    const Corner c2 = chain.at(2), c3 = chain.at(3);
    cap = c2.s;
    curves[1].s_end = cap;
    curves.push_back({"Ct3",
                      LyapunovTable(Family::N, p.c_plus, p.nu_plus, p.k, Anchor{c2.s, 0.0}, Sweep::DecreasingS,
                                    1.0 / p.c_plus, "N~3++", points),
                      c2.s, c3.s});
    curves.push_back({"Ct4",
                      LyapunovTable(Family::N, p.c_plus, p.nu_minus, p.k,
                                    Anchor{c3.s, anchor_value(c3.w, c3.s, p.nu_minus)}, Sweep::DecreasingS, 0.0,
                                    "N~4+-", points),
                      c3.s, 0.0});
  }
  return Region(RegionKind::Supercritical, cs, adm, std::move(curves), 1.0 / p.c_minus, 1.0 / p.c_plus, cap);
}

}  // namespace

Region::Region(RegionKind kind, CornerSet corners, Admissibility adm, std::vector<Curve> curves, double left_break,
               double right_break, double cap)
    : kind_(kind),
      corners_(std::move(corners)),
      adm_(std::move(adm)),
      curves_(std::move(curves)),
      left_break_(left_break),
      right_break_(right_break),
      cap_(cap) {
  if (curves_.size() != 2 && curves_.size() != 4) throw ConfigError("region: expected two or four boundary curves");
}

const Curve& Region::left_curve(double s) const { return s <= left_break_ ? curves_[0] : curves_[1]; }

const Curve& Region::right_curve(double s) const {
  if (!bounded()) throw DomainError("region: no right boundary in this scenario");
  return s <= right_break_ ? curves_[3] : curves_[2];
}

double Region::W_left(double s) const { return left_curve(s).table.curve_w(s); }
double Region::W_right(double s) const { return right_curve(s).table.curve_w(s); }

double Region::enclosed_margin(double w, double s) const {
  // Signed margin of {left < w < right, 0 < s < cap}; for the unbounded shape
  // only the left curve and s > 0 apply.
  if (s <= 0.0) return s;
  if (s >= cap_) return cap_ - s;
  double m = std::min(s, w - W_left(s));
  if (bounded()) {
    m = std::min(m, cap_ - s);
    const Curve& right = right_curve(s);
    if (right.table.contains(s)) m = std::min(m, right.table.curve_w(s) - w);
  }
  return m;
}

double Region::margin(double w, double s) const {
  if (kind_ == RegionKind::Subcritical) return enclosed_margin(w, s);
  if (s <= 0.0) return s;
  // The supercritical set is everything above s = 0 outside the enclosed
  // shape traced by the tilde curves, closed.
  if (!bounded()) return W_left(s) - w;
  if (s >= cap_) return s - cap_;
  double m = std::max(W_left(s) - w, s - cap_);
  const Curve& right = right_curve(s);
  if (right.table.contains(s)) m = std::max(m, w - right.table.curve_w(s));
  return m;
}

bool Region::contains(double w, double s) const {
  if (!(s > 0.0)) return false;
  const double m = margin(w, s);
  return kind_ == RegionKind::Subcritical ? m > 0.0 : m >= 0.0;
}

std::vector<PolylinePoint> Region::polylines(int resolution, double unbounded_extent) const {
  if (resolution < 2) throw ConfigError("polylines: resolution must be at least 2");
  const Params& p = corners_.params;
  if (!(unbounded_extent > 0.0)) unbounded_extent = 4.0 / p.c_minus + 2.0 * curves_[0].s_end;
  std::vector<PolylinePoint> out;
  for (const Curve& curve : curves_) {
    const double s_end = std::isfinite(curve.s_end) ? curve.s_end : std::max(unbounded_extent, curve.s_begin * 2.0);
    const double ta = curve.table.time_at(curve.s_begin);
    const double tb = curve.table.time_at(s_end);
    const auto& path = curve.table.path();

    std::vector<double> taus;
    for (int i = 0; i < resolution; ++i) taus.push_back(ta + (tb - ta) * i / (resolution - 1));
    // Refine within the first and last 1% of arc length, where the pieces meet.
    std::vector<double> arc(taus.size(), 0.0);
    for (std::size_t i = 1; i < taus.size(); ++i) arc[i] = arc[i - 1] + (path(taus[i]) - path(taus[i - 1])).norm();
    const double total = arc.back();
    if (total > 0.0 && resolution > 2) {
      const auto tau_at_arc = [&](double a) {
        const auto it = std::lower_bound(arc.begin(), arc.end(), a);
        const std::size_t i = std::clamp<std::size_t>(it - arc.begin(), 1, arc.size() - 1);
        const double f = (a - arc[i - 1]) / std::max(arc[i] - arc[i - 1], 1e-300);
        return taus[i - 1] + f * (taus[i] - taus[i - 1]);
      };
      const double head = tau_at_arc(0.01 * total), tail = tau_at_arc(0.99 * total);
      const int extra = std::max(resolution / 8, 4);
      for (int i = 1; i < extra; ++i) {
        const double f = static_cast<double>(i) / extra;
        taus.push_back(ta + (head - ta) * f);
        taus.push_back(tail + (tb - tail) * f);
      }
      const bool ascending = tb >= ta;
      std::sort(taus.begin(), taus.end(), [&](double a, double b) { return ascending ? a < b : a > b; });
      taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    }
    for (double t : taus) {
      const State2<double> x = path(t);
      out.push_back({curve.id, x[0], x[1]});
    }
  }
  return out;
}

Region build_subcritical(const Params& p, int table_points) {
  validate(p);
  const CornerSet cs = compute_corners(p);
  return assemble_subcritical(cs, admissibility(cs), table_points);
}

Region build_supercritical(const Params& p, int table_points) {
  validate(p);
  const CornerSet cs = compute_corners(p);
  return assemble_supercritical(cs, admissibility(cs), table_points);
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Subcritical: return "subcritical";
    case Verdict::Supercritical: return "supercritical";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

namespace {

CornerSet validated_corners(const Params& p) {
  validate(p);
  return compute_corners(p);
}

}  // namespace

Thresholds::Thresholds(const Params& p, int table_points)
    : params_(p),
      sup_([&] {
        const CornerSet cs = validated_corners(p);
        return assemble_supercritical(cs, ctepa::admissibility(cs), table_points);
      }()) {
  try {
    sub_.emplace(assemble_subcritical(sup_.corners(), sup_.admissibility(), table_points));
  } catch (const InadmissibleError&) {
    sub_.reset();
  }
}

namespace {

Classification decide(bool in_sub, bool in_sup, std::string sub_reason, std::string sup_reason,
                      const std::optional<Region>& sub) {
  if (in_sub && in_sup) throw InvariantViolation("classify: point lies in both regions");
  if (in_sub) return {Verdict::Subcritical, std::move(sub_reason)};
  if (in_sup) return {Verdict::Supercritical, std::move(sup_reason)};
  if (!sub) return {Verdict::Indeterminate, "subcritical region unavailable and outside supercritical region"};
  return {Verdict::Indeterminate, "between thresholds"};
}

}  // namespace

Classification Thresholds::classify_ws(double w, double s) const {
  if (!std::isfinite(w) || !std::isfinite(s)) throw DomainError("classify: non-finite state");
  if (!(s > 0.0)) throw DomainError("classify: s must be positive");
  const bool in_sub = sub_ && sub_->contains(w, s);
  const bool in_sup = sup_.contains(w, s);
  std::string sub_reason, sup_reason;
  if (in_sub) {
    sub_reason = "w > W_l on " + sub_->left_curve(s).id;
    if (sub_->bounded()) sub_reason += ", w < W_r on " + sub_->right_curve(s).id + ", s < s2";
  }
  if (in_sup) {
    if (sup_.bounded() && s >= sup_.cap()) {
      sup_reason = "s >= s~2";
    } else if (w <= sup_.W_left(s)) {
      sup_reason = "w <= W~_l on " + sup_.left_curve(s).id;
    } else {
      sup_reason = "w >= W~_r on " + sup_.right_curve(s).id;
    }
  }
  return decide(in_sub, in_sup, std::move(sub_reason), std::move(sup_reason), sub_);
}

Classification Thresholds::classify_Grho(double G, double rho) const {
  if (!std::isfinite(G) || !std::isfinite(rho)) throw DomainError("classify: non-finite state");
  if (!(rho > 0.0)) throw DomainError("classify: rho must be positive");
  const Params& p = params_;
  const double s = 1.0 / rho;
  const auto sq = [&](const Curve& c) { return rho * c.table.root(s); };

  bool in_sub = false;
  std::string sub_reason;
  if (sub_) {
    const auto& cv = sub_->curves();
    const bool left_dense = rho >= p.c_plus;
    const bool above = !sub_->bounded() || rho > 1.0 / sub_->cap();
    in_sub = above && (left_dense ? G > p.nu_plus - sq(cv[0]) : G > p.nu_minus - sq(cv[1]));
    sub_reason = std::string("G > nu_") + (left_dense ? "+" : "-") + " - rho sqrt(2P)";
    if (in_sub && sub_->bounded()) {
      const bool right_dense = rho >= p.c_minus;
      in_sub = right_dense ? G < p.nu_plus + sq(cv[3]) : G < p.nu_minus + sq(cv[2]);
      sub_reason += std::string(", G < nu_") + (right_dense ? "+" : "-") + " + rho sqrt(2N), rho > 1/s2";
    }
  }

  const auto& cv = sup_.curves();
  const auto low = [&] {
    return rho >= p.c_minus ? G <= p.nu_minus - sq(cv[0]) : G <= p.nu_plus - sq(cv[1]);
  };
  bool in_sup = false;
  std::string sup_reason;
  if (!sup_.bounded()) {
    in_sup = low();
    sup_reason = "G <= nu - rho sqrt(2P~)";
  } else if (rho <= 1.0 / sup_.cap()) {
    in_sup = true;
    sup_reason = "rho <= 1/s~2";
  } else if (low()) {
    in_sup = true;
    sup_reason = "G <= nu - rho sqrt(2P~)";
  } else {
    const Curve& right = rho >= p.c_plus ? cv[3] : cv[2];
    if (right.table.contains(s)) {
      const double nu = rho >= p.c_plus ? p.nu_minus : p.nu_plus;
      in_sup = G >= nu + sq(right);
      sup_reason = "G >= nu + rho sqrt(2N~)";
    }
  }
  return decide(in_sub, in_sup, std::move(sub_reason), std::move(sup_reason), sub_);
}

Classification classify_ws(const Params& p, double w, double s) { return Thresholds(p).classify_ws(w, s); }

Classification classify_Grho(const Params& p, double G, double rho) { return Thresholds(p).classify_Grho(G, rho); }

void write_curves_csv(std::ostream& os, const std::vector<PolylinePoint>& points) {
  os << "segment_id,w,s,G,rho\n";
  for (const auto& pt : points) {
    const double rho = pt.s != 0.0 ? 1.0 / pt.s : std::numeric_limits<double>::infinity();
    const double G = pt.s != 0.0 ? pt.w / pt.s : std::numeric_limits<double>::quiet_NaN();
    os << pt.segment << ',' << detail::format_double(pt.w) << ',' << detail::format_double(pt.s) << ','
       << detail::format_double(G) << ',' << detail::format_double(rho) << '\n';
  }
}

}  // namespace ctepa
