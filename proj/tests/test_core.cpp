#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctepa/core.hpp"
#include "ctepa/errors.hpp"

using namespace ctepa;

TEST(Validate, AcceptsConstantBackground) {
  const Params p = validate(1, 1, 1, 0.5, 0.5);
  EXPECT_EQ(p.nu_plus, 0.5);
}

TEST(Validate, NamesFirstViolation) {
  const auto message = [](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_EQ(message([] { validate(0, 1, 1, 1, 1); }), "k must be positive");
  EXPECT_EQ(message([] { validate(1, 2, 1, 1, 1); }), "c_minus exceeds c_plus");
  EXPECT_EQ(message([] { validate(1, 1, 1, 2, 1); }), "nu_minus exceeds nu_plus");
  EXPECT_EQ(message([] { validate(1, -1, 1, 1, 1); }), "c_minus must be positive");
  EXPECT_EQ(message([] { validate(1, 1, 1, 0, 1); }), "nu_minus must be positive");
  EXPECT_EQ(message([] { validate(NAN, 1, 1, 1, 1); }), "k must be finite");
}

TEST(Regime, BoundaryIsStrong) {
  const Regime r = classify_regime(Params{1, 1, 1, 2, 2});
  EXPECT_EQ(r.label, Alignment::Strong);
  EXPECT_EQ(r.sub, SubScenario::I);
  EXPECT_EQ(r.sup, SupScenario::III);
}

TEST(Regime, Weak) {
  const Regime r = classify_regime(Params{1, 1, 1, 1, 1});
  EXPECT_EQ(r.label, Alignment::Weak);
  EXPECT_EQ(r.sub, SubScenario::II);
  EXPECT_EQ(r.sup, SupScenario::IV);
}

TEST(Regime, Median) {
  const Regime r = classify_regime(Params{1, 1, 4, 1, 3});
  EXPECT_EQ(r.label, Alignment::Median);
  EXPECT_EQ(r.sub, SubScenario::II);
  EXPECT_EQ(r.sup, SupScenario::III);
}

TEST(Regime, ExactlyOneLabelAndMonotoneInNuMinus) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double cm = u(rng), cp = cm + u(rng), nm = u(rng), np = nm + u(rng);
    const Params p = validate(u(rng), cm, cp, nm, np);
    const Regime r = classify_regime(p);
    if (r.label == Alignment::Strong) EXPECT_TRUE(r.sub == SubScenario::I && r.sup == SupScenario::III);
    if (r.label == Alignment::Weak) EXPECT_TRUE(r.sub == SubScenario::II && r.sup == SupScenario::IV);
    if (r.label == Alignment::Median) EXPECT_TRUE(r.sub == SubScenario::II && r.sup == SupScenario::III);
    if (r.label == Alignment::Strong) {
      Params q = p;
      q.nu_minus = std::min(q.nu_plus, q.nu_minus * 1.5);
      EXPECT_EQ(classify_regime(q).label, Alignment::Strong);
    }
  }
}

TEST(NuBounds, Products) {
  EXPECT_EQ(nu_bounds(1, 1, 1), std::make_pair(1.0, 1.0));
  const auto [lo, hi] = nu_bounds(0.5, 2, 3);
  EXPECT_DOUBLE_EQ(lo, 1.5);
  EXPECT_DOUBLE_EQ(hi, 6.0);
  EXPECT_THROW(nu_bounds(0, 1, 1), ConfigError);
  EXPECT_THROW(nu_bounds(1, 1, -2), ConfigError);
}

TEST(Spectral, Borderline) {
  const Spectral sp = spectral(1, 2, 1);
  EXPECT_EQ(sp.branch, Branch::Borderline);
  EXPECT_EQ(sp.lambda1, -1.0);
  EXPECT_EQ(sp.lambda2, -1.0);
}

TEST(Spectral, SmallNuApproachesUnitFrequency) {
  const Spectral sp = spectral(1, 1e-4, 1);
  EXPECT_EQ(sp.branch, Branch::Complex);
  EXPECT_NEAR(sp.theta, 1.0, 1e-8);
}

TEST(Spectral, RealRoots) {
  const Spectral sp = spectral(1, 3, 1);
  ASSERT_EQ(sp.branch, Branch::Real);
  EXPECT_NEAR(sp.lambda1, -0.3819660112501051, 1e-15);
  EXPECT_NEAR(sp.lambda2, -2.618033988749895, 1e-15);
  EXPECT_NEAR(sp.lambda1 * sp.lambda2, 1.0, 1e-15);
}

TEST(Spectral, VietaAndFrequencyIdentities) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int i = 0; i < 5000; ++i) {
    const double c = u(rng), nu = u(rng), k = u(rng);
    const Spectral sp = spectral(c, nu, k);
    if (sp.branch == Branch::Real) {
      EXPECT_NEAR((sp.lambda1 + sp.lambda2) / -nu, 1.0, 1e-12);
      EXPECT_NEAR(sp.lambda1 * sp.lambda2 / (k * c), 1.0, 1e-12);
      EXPECT_LT(sp.lambda1, 0.0);
      EXPECT_GE(sp.lambda1, sp.lambda2);
    } else if (sp.branch == Branch::Complex) {
      EXPECT_GT(sp.theta, 0.0);
      EXPECT_NEAR((nu * nu / 4 + sp.theta * sp.theta) / (k * c), 1.0, 1e-12);
    }
  }
}

TEST(Spectral, ContinuousThroughBorderline) {
  const double c = 1.3, k = 0.7, edge = 2.0 * std::sqrt(k * c);
  const Spectral above = spectral(c, edge * (1 + 1e-8), k);
  const Spectral below = spectral(c, edge * (1 - 1e-8), k);
  ASSERT_EQ(above.branch, Branch::Real);
  ASSERT_EQ(below.branch, Branch::Complex);
  // The split between the roots scales like the square root of the offset.
  EXPECT_NEAR(above.lambda1, -edge / 2, 3e-4);
  EXPECT_NEAR(above.lambda2, -edge / 2, 3e-4);
  EXPECT_NEAR(below.theta, 0.0, 3e-4);
}
