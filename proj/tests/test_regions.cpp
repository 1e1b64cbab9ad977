#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "ctepa/errors.hpp"
#include "ctepa/regions.hpp"
#include "sample_params.hpp"

using namespace ctepa;
using testing_params::random_params;

namespace {

const Params kWeak{1, 1, 1.05, 0.3, 0.32};
const Params kMedian{1, 1, 1.1, 1.5, 2.2};
const Params kStrong{1, 0.8, 1.0, 2.5, 3.0};

std::set<std::string> segment_ids(const std::vector<PolylinePoint>& pts) {
  std::set<std::string> ids;
  for (const auto& p : pts) ids.insert(p.segment);
  return ids;
}

double hausdorff(const std::vector<PolylinePoint>& a, const std::vector<PolylinePoint>& b) {
  const auto one_way = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = INFINITY;
      for (const auto& q : to) best = std::min(best, std::hypot(p.w - q.w, p.s - q.s));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

}  // namespace

TEST(Regions, ShapeFollowsScenario) {
  const Region strong = build_subcritical(kStrong);
  EXPECT_FALSE(strong.bounded());
  EXPECT_TRUE(std::isinf(strong.cap()));
  EXPECT_EQ(segment_ids(strong.polylines()), (std::set<std::string>{"C1", "C2"}));
  // Far to the right of the left boundary is inside.
  for (double s : {0.1, 1.0, 5.0, 40.0}) EXPECT_TRUE(strong.contains(kStrong.nu_plus * s + 10, s));

  const Region weak = build_subcritical(kWeak);
  EXPECT_TRUE(weak.bounded());
  EXPECT_EQ(segment_ids(weak.polylines()), (std::set<std::string>{"C1", "C2", "C3", "C4"}));
  EXPECT_TRUE(std::isfinite(weak.cap()));

  const Region sup = build_supercritical(kWeak);
  EXPECT_TRUE(sup.bounded());
  EXPECT_EQ(segment_ids(sup.polylines()), (std::set<std::string>{"Ct1", "Ct2", "Ct3", "Ct4"}));
  EXPECT_FALSE(build_supercritical(kStrong).bounded());
}

TEST(Regions, PolylinesCloseAtStar) {
  const Region weak = build_subcritical(kWeak);
  const auto pts = weak.polylines();
  EXPECT_NEAR(pts.front().w, 0.0, 1e-12);
  EXPECT_NEAR(pts.front().s, 0.0, 1e-12);
  EXPECT_NEAR(pts.back().s, 0.0, 1e-10);
  EXPECT_NEAR(pts.back().w, weak.corners().sub.star_w(), 1e-9);
  EXPECT_GE(pts.back().w, 0.0);
  // Segment ends meet the next segment's start.
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].segment == pts[i - 1].segment) continue;
    EXPECT_NEAR(pts[i].w, pts[i - 1].w, 1e-9);
    EXPECT_NEAR(pts[i].s, pts[i - 1].s, 1e-9);
  }
}

TEST(Regions, PolylineResolution) {
  const Region weak = build_subcritical(kWeak);
  const auto two = weak.polylines(2);
  ASSERT_EQ(two.size(), 8u);
  EXPECT_NEAR(two[1].s, 1.0 / kWeak.c_plus, 1e-12);
  EXPECT_GE(weak.polylines().size(), 4u * 512u);
  EXPECT_THROW(weak.polylines(1), ConfigError);
}

TEST(Regions, PolylinesDenserNearJunctions) {
  const Region weak = build_subcritical(kWeak);
  const auto pts = weak.polylines(512);
  std::vector<PolylinePoint> c2;
  for (const auto& p : pts)
    if (p.segment == "C2") c2.push_back(p);
  std::vector<double> gaps;
  for (std::size_t i = 1; i < c2.size(); ++i) gaps.push_back(std::hypot(c2[i].w - c2[i - 1].w, c2[i].s - c2[i - 1].s));
  const double median = [&] {
    auto g = gaps;
    std::nth_element(g.begin(), g.begin() + g.size() / 2, g.end());
    return g[g.size() / 2];
  }();
  EXPECT_LT(gaps.front(), 0.5 * median);
  EXPECT_LT(gaps.back(), 0.5 * median);
}

TEST(Regions, CornerIsOnOpenBoundary) {
  const Region weak = build_subcritical(kWeak);
  const Corner c1 = weak.corners().sub.at(1);
  EXPECT_FALSE(weak.contains(c1.w, c1.s));
  EXPECT_TRUE(weak.contains(c1.w + 1e-6, c1.s));
}

TEST(Regions, JunctionContinuity) {
  std::mt19937_64 rng(21);
  for (Alignment a : {Alignment::Weak, Alignment::Median, Alignment::Strong}) {
    for (int i = 0; i < 8; ++i) {
      const Params p = random_params(rng, a, 0.1, 0.1);
      const Thresholds th(p, 1024);
      const auto check = [&](const Region& r) {
        const auto& cv = r.curves();
        // Relative to |w|: some draws put s2 near 1e6, where w3 carries the same magnitude.
        const auto gap = [](const Curve& a, const Curve& b, double s) {
          const double wa = a.table.curve_w(s);
          return std::abs(wa - b.table.curve_w(s)) / (1.0 + std::abs(wa));
        };
        EXPECT_LT(gap(cv[0], cv[1], r.left_break()), 1e-9);
        if (r.bounded()) {
          EXPECT_LT(gap(cv[2], cv[3], r.right_break()), 1e-9);
          // The top junction is a vertical tangent, so rounding in s shows up as its square root in w.
          const double w_top = cv[2].table.curve_w(r.cap());
          EXPECT_LT(std::abs(cv[1].table.curve_w(r.cap()) - w_top), 1e-6 * (1.0 + std::abs(w_top)));
          // Nonempty between the two boundaries.
          for (double f : {0.1, 0.5, 0.9}) EXPECT_LT(r.W_left(f * r.cap()), r.W_right(f * r.cap()));
        }
      };
      check(th.supercritical());
      if (th.subcritical()) check(*th.subcritical());
    }
  }
}

TEST(Regions, InadmissibleReportsInequality) {
  const Params wide{1, 1, 4, 0.1, 3.9};
  try {
    build_subcritical(wide);
    FAIL() << "expected InadmissibleError";
  } catch (const InadmissibleError& e) {
    EXPECT_NE(std::string(e.what()).find("inadmissible parameters: AC1 fails"), std::string::npos);
  }
  const Thresholds th(wide, 512);
  EXPECT_FALSE(th.subcritical().has_value());
  // The supercritical half is still available.
  EXPECT_EQ(th.classify_ws(-1.0, 0.01).verdict, Verdict::Supercritical);
}

TEST(Regions, SupercriticalExamples) {
  const Thresholds th(kWeak);
  EXPECT_EQ(th.classify_ws(-1.0, 0.01).verdict, Verdict::Supercritical);
  const double st2 = th.supercritical().cap();
  for (double w : {-50.0, 0.0, 3.0, 50.0}) {
    EXPECT_EQ(th.classify_ws(w, st2).verdict, Verdict::Supercritical);
    EXPECT_EQ(th.classify_ws(w, st2 * 1.5).verdict, Verdict::Supercritical);
    EXPECT_EQ(th.classify_Grho(w, 0.99 / st2).verdict, Verdict::Supercritical);
  }
  // Closed side: points on the tilde curves belong to the supercritical set.
  for (const auto& pt : th.supercritical().polylines(64)) {
    if (pt.s <= 0.0 || pt.s >= st2) continue;
    if (pt.segment != "Ct1") continue;
    const double w_on = th.supercritical().W_left(pt.s);
    EXPECT_TRUE(th.supercritical().contains(w_on, pt.s));
  }
}

TEST(Regions, StrongSubcriticalExamples) {
  const Thresholds th(kStrong);
  const Classification eq = th.classify_ws(kStrong.nu_plus / kStrong.c_plus + 1, 1 / kStrong.c_plus);
  EXPECT_EQ(eq.verdict, Verdict::Subcritical);
  EXPECT_FALSE(eq.decided_by.empty());
  for (double rho : {kStrong.c_plus, 2.0, 10.0}) EXPECT_EQ(th.classify_Grho(100.0, rho).verdict, Verdict::Subcritical);
}

TEST(Regions, GapPointIsIndeterminate) {
  // c- < c+: at fixed s the left boundaries separate; the midpoint is in neither set.
  const Thresholds th(kWeak);
  const double s = 0.3;
  const double lo = th.supercritical().W_left(s), hi = th.subcritical()->W_left(s);
  ASSERT_LT(lo, hi);
  EXPECT_EQ(th.classify_ws(0.5 * (lo + hi), s).verdict, Verdict::Indeterminate);
  EXPECT_EQ(th.classify_ws(hi, s).verdict, Verdict::Indeterminate);
}

TEST(Regions, DomainErrors) {
  const Thresholds th(kWeak, 256);
  EXPECT_THROW(th.classify_ws(0.0, 0.0), DomainError);
  EXPECT_THROW(th.classify_ws(0.0, -1.0), DomainError);
  EXPECT_THROW(th.classify_Grho(0.0, 0.0), DomainError);
  EXPECT_THROW(th.classify_ws(NAN, 1.0), DomainError);
}

TEST(Regions, NestingAndChangeOfVariables) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (Alignment a : {Alignment::Weak, Alignment::Median, Alignment::Strong}) {
    for (int i = 0; i < 5; ++i) {
      const Params p = random_params(rng, a, 0.1, 0.1);
      const Thresholds th(p, 1024);
      const double s_top = 1.5 * (std::isfinite(th.supercritical().cap()) ? th.supercritical().cap() : 3.0 / p.c_minus);
      for (int j = 0; j < 400; ++j) {
        const double s = s_top * (1e-3 + u(rng));
        const double w = (u(rng) - 0.5) * 4.0 * (1.0 + p.nu_plus * s_top);
        Classification ws;
        ASSERT_NO_THROW(ws = th.classify_ws(w, s));
        // Skip points numerically on a boundary, where the two evaluations may round apart.
        const double m_sup = th.supercritical().margin(w, s);
        const double m_sub = th.subcritical() ? th.subcritical()->margin(w, s) : 1.0;
        if (std::abs(m_sup) < 1e-9 || std::abs(m_sub) < 1e-9) continue;
        EXPECT_EQ(th.classify_Grho(w / s, 1.0 / s).verdict, ws.verdict) << "w=" << w << " s=" << s;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 5000);
}

TEST(Regions, SharpWhenCoefficientsConstant) {
  for (const Params& p : {Params{1, 1, 1, 0.4, 0.4}, Params{1, 1, 1, 3, 3}, Params{2, 0.7, 0.7, 1.2, 1.2}}) {
    const Thresholds th(p, 1024);
    ASSERT_TRUE(th.subcritical().has_value());
    int indeterminate = 0;
    const double s_top = 3.0 / p.c_minus;
    for (int i = 1; i <= 200; ++i) {
      for (int j = 0; j < 200; ++j) {
        const double s = s_top * i / 200.0;
        const double w = -4.0 + 8.0 * j / 199.0 + p.nu_plus * s;
        const Classification c = th.classify_ws(w, s);
        if (c.verdict == Verdict::Indeterminate && std::abs(th.supercritical().margin(w, s)) > 1e-12) ++indeterminate;
      }
    }
    EXPECT_EQ(indeterminate, 0) << "k=" << p.k << " nu=" << p.nu_plus;
  }
}

TEST(Regions, HausdorffGapShrinks) {
  double previous = INFINITY, last_eps = 0.0;
  for (double eps : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    const Params p{1, 1, 1 + eps, 0.3, 0.3 * (1 + eps)};
    const Thresholds th(p, 1024);
    ASSERT_TRUE(th.subcritical().has_value()) << eps;
    const double d = hausdorff(th.subcritical()->polylines(128), th.supercritical().polylines(128));
    EXPECT_LT(d, previous) << eps;
    previous = d;
    last_eps = eps;
  }
  // The distance shrinks linearly with the gap.
  EXPECT_LT(previous, 10.0 * last_eps);
}

TEST(Regions, ClassicalConstantBackgroundLimit) {
  // With nu -> 0 and constant c the subcritical set should be G^2 < k (2 rho - c).
  const double k = 1.0, c = 1.0, nu = 1e-7;
  const Thresholds th(Params{k, c, c, nu, nu}, 2048);
  int classical_mismatch = 0, printed_mismatch = 0, compared = 0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const double rho = 0.05 + 3.0 * i / 99.0;
      const double G = -3.0 + 6.0 * j / 99.0;
      const double lin = 2.0 * rho - c;
      const double classical = k * lin - G * G;
      if (std::abs(classical) < 1e-3) continue;
      const bool sub = th.classify_Grho(G, rho).verdict == Verdict::Subcritical;
      ++compared;
      if (sub != (classical > 0)) ++classical_mismatch;
      if (sub != (lin > 0 && G * G < std::sqrt(k * lin))) ++printed_mismatch;
    }
  }
  EXPECT_GT(compared, 9000);
  EXPECT_EQ(classical_mismatch, 0);
  EXPECT_GT(printed_mismatch, 0);
}

TEST(Regions, CsvExport) {
  const Region r = build_subcritical(kWeak);
  std::ostringstream os;
  write_curves_csv(os, r.polylines(2));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "segment_id,w,s,G,rho");
  std::getline(is, line);
  EXPECT_EQ(line.rfind("C1,0,0,", 0), 0u);
}
