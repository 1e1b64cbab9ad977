#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctepa/errors.hpp"
#include "ctepa/phaseplane.hpp"
#include "ctepa/oracle.hpp"
#include "sample_params.hpp"

using namespace ctepa;

using testing_params::random_params;

TEST(LocalTrajectory, ReproducesStart) {
  for (double nu : {0.3, 2.0, 5.0}) {
    const auto path = local_trajectory(1.0, nu, 1.0, 0.7, -0.4, 2.5);
    EXPECT_NEAR(path.w(2.5), 0.7, 1e-12);
    EXPECT_NEAR(path.s(2.5), -0.4, 1e-12);
  }
}

TEST(LocalTrajectory, EquilibriumIsFixed) {
  const auto path = local_trajectory(2.0, 0.5, 3.0, 0.25, 0.5);
  for (double t : {-7.0, -1.0, 3.0}) {
    EXPECT_NEAR(path.w(t), 0.25, 1e-14);
    EXPECT_NEAR(path.s(t), 0.5, 1e-14);
  }
}

TEST(LocalTrajectory, SatisfiesFrozenSystem) {
  const double k = 1.7, c = 0.8;
  for (double nu : {0.4, 2.0 * std::sqrt(k * c), 4.0}) {
    const auto path = local_trajectory(c, nu, k, -0.3, 0.9, 0.0);
    const double h = 1e-5;
    for (double t = -3.0; t <= 3.0; t += 0.25) {
      const State2<double> d = (path(t + h) - path(t - h)) / (2 * h);
      const auto v = path.velocity(t);
      const double scale = 1.0 + v.norm();
      EXPECT_NEAR(d[0], v[0], 1e-7 * scale);
      EXPECT_NEAR(d[1], v[1], 1e-7 * scale);
      EXPECT_NEAR(path.drift(t), v[1], 1e-12 * scale);
    }
  }
}

TEST(LocalTrajectory, MatchesRk4NearZeroDamping) {
  const auto path = local_trajectory(1.0, 0.0, 1.0, 0.0, 0.0);
  oracle::Point x;
  for (int i = 1; i <= 100; ++i) {
    x = oracle::flow(1.0, 0.0, 1.0, x, -0.1 * i, 1e-3);
    EXPECT_NEAR(path.w(x.t), x.w, 1e-8);
    EXPECT_NEAR(path.s(x.t), x.s, 1e-8);
  }
  EXPECT_NEAR(path.s(-10.0), 1.0 - std::cos(10.0), 1e-12);
}

TEST(LocalTrajectory, BasisCoefficientsReproducePath) {
  const double k = 1.2, c = 0.9;
  const double kc = k * c;
  for (double nu : {0.5, 2.0 * std::sqrt(kc), 3.5}) {
    const auto path = local_trajectory(c, nu, k, 0.4, 1.9, 0.0);
    const double a1 = path.a1(), a2 = path.a2();
    for (double t : {-2.0, -0.5, 0.0, 1.0}) {
      double w = 0, s = 0;
      if (path.branch() == Branch::Real) {
        const double l1 = -nu / 2 + path.rate(), l2 = -nu / 2 - path.rate();
        w = nu / c - kc * (a1 * std::exp(l1 * t) + a2 * std::exp(l2 * t));
        s = 1 / c + a1 * l1 * std::exp(l1 * t) + a2 * l2 * std::exp(l2 * t);
      } else if (path.branch() == Branch::Complex) {
        const double th = path.rate(), e = std::exp(-nu * t / 2);
        w = nu / c - e * kc * (a1 * std::cos(th * t) + a2 * std::sin(th * t));
        s = 1 / c + e * ((-a1 * nu / 2 + a2 * th) * std::cos(th * t) - (a1 * th + a2 * nu / 2) * std::sin(th * t));
      } else {
        s = 1 / c + (a1 + a2 * t) * std::exp(-nu * t / 2);
        w = path.w(t);
      }
      EXPECT_NEAR(path.w(t), w, 1e-11);
      EXPECT_NEAR(path.s(t), s, 1e-11);
    }
  }
}

TEST(LocalTrajectory, NextTurnIsAZeroOfDrift) {
  const auto osc = local_trajectory(1.0, 0.5, 1.0, -0.6, 1.0, 1.0);
  const auto back = osc.next_turn(-1);
  ASSERT_TRUE(back);
  EXPECT_LT(*back, 1.0);
  EXPECT_NEAR(osc.drift(*back), 0.0, 1e-12);
  const auto fwd = osc.next_turn(+1);
  ASSERT_TRUE(fwd);
  EXPECT_GT(*fwd, 1.0);
  EXPECT_NEAR(osc.drift(*fwd), 0.0, 1e-12);
  // Sign of the drift is constant between the two zeros.
  for (double t = *back + 1e-6; t < *fwd; t += (*fwd - *back) / 50) EXPECT_LT(osc.drift(t), 0.0);

  // Starting on the line w = nu s, the next turn is half a period away.
  const auto on_line = local_trajectory(1.0, 0.5, 1.0, 0.5 * 1.6, 1.6, 0.0);
  const auto half = on_line.next_turn(-1);
  ASSERT_TRUE(half);
  EXPECT_NEAR(*half, -std::numbers::pi / on_line.rate(), 1e-12);

  // Overdamped paths started on the line never return to it.
  EXPECT_FALSE(local_trajectory(1.0, 3.0, 1.0, 3.0 * 2.0, 2.0).next_turn(-1));
}

TEST(Corners, FrozenReferenceSubcritical) {
  // Constant coefficients k = c = 1, nu = 0.2; frozen values from an independent
  // high-order integration, checked again against the RK4 oracle.
  const CornerSet cs = compute_corners(Params{1, 1, 1, 0.2, 0.2});
  const auto ref = oracle::corners(cs.params, 1e-4);
  EXPECT_EQ(cs.sub.step1.s, 1.0);
  EXPECT_EQ(cs.sub.step3->s, 1.0);
  EXPECT_NEAR(cs.sub.step1.w, ref.at("w1"), 1e-7);
  EXPECT_NEAR(cs.sub.step2->s, ref.at("s2"), 1e-7);
  EXPECT_NEAR(cs.sub.step3->w, ref.at("w3"), 1e-7);
  EXPECT_NEAR(cs.sub.step4->s, ref.at("s4"), 1e-7);
  EXPECT_NEAR(cs.sub.step1.w, -0.9592853831081735, 1e-9);
  EXPECT_NEAR(cs.sub.step2->s, 2.371276340721016, 1e-9);
  EXPECT_NEAR(cs.sub.step3->w, 1.7897006180000443, 1e-9);
  EXPECT_NEAR(cs.sub.step4->s, -0.8803988026213634, 1e-9);
  EXPECT_NEAR(*cs.sub.w_star, 1.4701177891865895, 1e-9);
}

TEST(Corners, FrozenReferenceSupercritical) {
  const CornerSet cs = compute_corners(Params{1, 0.9, 1.1, 0.3, 0.4});
  const auto ref = oracle::corners(cs.params, 1e-4);
  EXPECT_DOUBLE_EQ(cs.sup.step1.s, 1.0 / 0.9);
  EXPECT_DOUBLE_EQ(cs.sup.step3->s, 1.0 / 1.1);
  EXPECT_NEAR(cs.sup.step1.w, ref.at("wt1"), 1e-7);
  EXPECT_NEAR(cs.sup.step2->s, ref.at("st2"), 1e-7);
  EXPECT_NEAR(cs.sup.step3->w, ref.at("wt3"), 1e-7);
  EXPECT_NEAR(*cs.sup.w_star, ref.at("wt_star"), 1e-7);
}

TEST(Corners, MatchOracleAcrossRegimes) {
  std::mt19937_64 rng(2024);
  for (Alignment a : {Alignment::Weak, Alignment::Median, Alignment::Strong}) {
    for (int i = 0; i < 15; ++i) {
      const Params p = random_params(rng, a);
      const CornerSet cs = compute_corners(p);
      const auto ref = oracle::corners(p, 2e-3);
      const auto check = [&](const char* key, std::optional<double> mine) {
        const bool in_ref = ref.count(key) > 0;
        ASSERT_EQ(in_ref, mine.has_value()) << key;
        if (in_ref) EXPECT_NEAR(*mine, ref.at(key), 1e-6 * (1 + std::abs(*mine))) << key;
      };
      check("w1", cs.sub.step1.w);
      check("s2", cs.sub.step2 ? std::optional(cs.sub.step2->s) : std::nullopt);
      check("w3", cs.sub.step3 ? std::optional(cs.sub.step3->w) : std::nullopt);
      if (a == Alignment::Weak) check("s4", cs.sub.step4 ? std::optional(cs.sub.step4->s) : std::nullopt);
      check("w_star", cs.sub.w_star);
      check("wt1", cs.sup.step1.w);
      check("st2", cs.sup.step2 ? std::optional(cs.sup.step2->s) : std::nullopt);
      check("wt3", cs.sup.step3 ? std::optional(cs.sup.step3->w) : std::nullopt);
      check("wt_star", cs.sup.w_star);
    }
  }
}

TEST(Corners, StructuralInvariants) {
  std::mt19937_64 rng(99);
  for (Alignment a : {Alignment::Weak, Alignment::Median, Alignment::Strong}) {
    for (int i = 0; i < 300; ++i) {
      const Params p = random_params(rng, a);
      const CornerSet cs = compute_corners(p);
      EXPECT_LT(cs.sub.step1.w, p.nu_plus * cs.sub.step1.s);
      EXPECT_LT(cs.sub.step1.w, 0.0);
      if (cs.sub.step2) EXPECT_DOUBLE_EQ(cs.sub.step2->w, p.nu_minus * cs.sub.step2->s);
      if (cs.sub.step3) EXPECT_GT(cs.sub.step3->w, p.nu_minus * cs.sub.step3->s);
      if (cs.sup.step2) EXPECT_DOUBLE_EQ(cs.sup.step2->w, p.nu_plus * cs.sup.step2->s);
      for (auto z : {cs.constants.z1, cs.constants.z2, cs.constants.z3, cs.constants.z4}) {
        if (z) EXPECT_GT(*z, 1.0);
      }
    }
  }
}

TEST(Corners, ExitPointsLieOnRegionInterfaces) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Params p = random_params(rng, Alignment::Weak);
    const CornerChain sub = subcritical_corners(p);
    const auto c1 = local_trajectory(p.c_plus, p.nu_plus, p.k, 0, 0, 0);
    EXPECT_NEAR(c1.s(sub.step1.t), 1 / p.c_plus, 1e-9);
    EXPECT_NEAR(c1.w(sub.step1.t), sub.step1.w, 1e-9);
    const auto c2 = local_trajectory(p.c_plus, p.nu_minus, p.k, sub.step1.w, sub.step1.s, sub.step1.t);
    EXPECT_NEAR(c2.w(sub.step2->t) - p.nu_minus * c2.s(sub.step2->t), 0.0, 1e-9);
    EXPECT_NEAR(c2.s(sub.step2->t), sub.step2->s, 1e-9 * sub.step2->s);
    if (!sub.step3) continue;
    const auto c3 = local_trajectory(p.c_minus, p.nu_minus, p.k, sub.step2->w, sub.step2->s, sub.step2->t);
    EXPECT_NEAR(c3.s(sub.step3->t), 1 / p.c_minus, 1e-9);
    EXPECT_NEAR(c3.w(sub.step3->t), sub.step3->w, 1e-9 * (1 + std::abs(sub.step3->w)));
    if (!sub.step4) continue;
    const auto c4 = local_trajectory(p.c_minus, p.nu_plus, p.k, sub.step3->w, sub.step3->s, sub.step3->t);
    EXPECT_NEAR(c4.w(sub.step4->t) - p.nu_plus * c4.s(sub.step4->t), 0.0, 1e-9 * (1 + std::abs(sub.step4->w)));
  }
}

TEST(Corners, StructuralErrors) {
  const CornerChain strong = subcritical_corners(Params{1, 1, 1, 3, 3});
  try {
    strong.at(2);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "scenario I: s2 undefined");
  }
  const CornerChain wide = subcritical_corners(Params{1, 1, 4, 0.1, 3.9});
  EXPECT_THROW(wide.at(3), InadmissibleError);
  EXPECT_THROW(supercritical_corners(Params{1, 1, 1, 3, 3}).at(2), DomainError);
}

TEST(Admissibility, ConstantBackgroundSatisfiesAc1) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 500; ++i) {
    const double c = u(rng), k = u(rng), nm = u(rng), np = nm + u(rng);
    const Params p = validate(k, c, c, nm, np);
    if (classify_regime(p).sub != SubScenario::II) continue;
    EXPECT_TRUE(admissibility(compute_corners(p)).ac1);
  }
}

TEST(Admissibility, ConstantAlignmentGivesAc2FromAc1) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 500; ++i) {
    const double cm = u(rng), cp = cm + u(rng), nu = u(rng);
    const Params p = validate(u(rng), cm, cp, nu, nu);
    if (classify_regime(p).sub != SubScenario::II) continue;
    const Admissibility a = admissibility(compute_corners(p));
    if (a.ac1) EXPECT_TRUE(a.ac2);
  }
}

TEST(Admissibility, WideGapsFailAc1) {
  const Admissibility a = admissibility(compute_corners(Params{1, 1, 4, 0.1, 3.9}));
  EXPECT_FALSE(a.ac1);
  EXPECT_FALSE(a.closes());
  EXPECT_NE(a.failure().find("AC1 fails"), std::string::npos);
}

TEST(Admissibility, ChainAndExplicitFormAgree) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int weak = 0;
  for (int i = 0; i < 5000; ++i) {
    const double cm = 0.2 + 2 * u(rng), cp = cm * (1 + u(rng)), k = 0.2 + 2 * u(rng);
    const double nm = 2 * std::sqrt(k * cm) * (0.02 + 1.2 * u(rng)), np = nm * (1 + u(rng));
    const Params p = validate(k, cm, cp, nm, np);
    const CornerSet cs = compute_corners(p);
    const Admissibility a = admissibility(cs);
    if (!a.applicable) continue;
    if (a.ac3) EXPECT_TRUE(a.ac2);
    if (a.ac2) EXPECT_TRUE(a.ac1);
    EXPECT_EQ(a.ac1, cs.sub.step2->s > 1 / p.c_minus);
    if (a.ac1) EXPECT_EQ(a.ac2, cs.sub.step3->w > p.nu_plus / p.c_minus);
    if (a.ac3e) {
      ++weak;
      EXPECT_EQ(a.ac3e->holds(), a.ac3_explicit->holds());
      EXPECT_NEAR(a.ac3_explicit->margin(), a.ac3e->margin() / std::sqrt(p.c_minus),
                  1e-10 * (1 + std::abs(a.ac3_explicit->rhs)));
      if (a.ac2) EXPECT_EQ(a.ac3, cs.sub.step4->s <= 0.0);
    }
  }
  EXPECT_GT(weak, 100);
}

TEST(Admissibility, SupercriticalChecksAlwaysHold) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    const Params p = random_params(rng, Alignment::Weak);
    const Admissibility a = admissibility(compute_corners(p));
    EXPECT_TRUE(a.sup_s2 && a.sup_w3 && a.sup_wstar);
  }
}

TEST(Thresholds, GFlatAndGSharp) {
  const double edge = 2.0 * std::sqrt(1.0 * 1.5);
  EXPECT_NEAR(g_flat(Params{1, 1, 1.5, edge, edge}), edge / 2, 1e-12);
  EXPECT_NEAR(g_sharp(Params{1, 1, 1, 0.5, 2}), 1.0, 1e-12);
  const Params p{1, 1, 1, 3, 3};
  EXPECT_NEAR(g_flat(p), (3 - std::sqrt(5.0)) / 2, 1e-14);
  const CornerChain sub = subcritical_corners(p);
  const auto c2 = local_trajectory(p.c_plus, p.nu_minus, p.k, sub.step1.w, sub.step1.s, sub.step1.t);
  EXPECT_NEAR(c2.w(-50) / c2.s(-50), g_flat(p), 1e-4);
  EXPECT_THROW(g_flat(Params{1, 1, 1, 1, 1}), DomainError);
  EXPECT_THROW(g_sharp(Params{1, 1, 1, 1, 1}), DomainError);
}

TEST(Corners, ContinuousThroughBorderline) {
  const double k = 0.8, c = 1.25, edge = 2.0 * std::sqrt(k * c);
  const auto at = [&](double nu_plus) { return compute_corners(validate(k, c, c, 0.5, nu_plus)); };
  const CornerSet hi = at(edge * (1 + 1e-8)), lo = at(edge * (1 - 1e-8)), mid = at(edge);
  ASSERT_TRUE(hi.constants.eta1 && lo.constants.z1);
  EXPECT_NEAR(hi.sub.step1.w, lo.sub.step1.w, 1e-6);
  EXPECT_NEAR(mid.sub.step1.w, lo.sub.step1.w, 1e-6);
  EXPECT_NEAR(hi.sub.step1.t, lo.sub.step1.t, 1e-6);
  const auto tilde = [&](double nu_minus) { return supercritical_corners(validate(k, c, c, nu_minus, 3.0)); };
  EXPECT_NEAR(tilde(edge * (1 + 1e-8)).step1.w, tilde(edge * (1 - 1e-8)).step1.w, 1e-6);
  EXPECT_NEAR(tilde(edge).step1.w, tilde(edge * (1 - 1e-8)).step1.w, 1e-6);
}
