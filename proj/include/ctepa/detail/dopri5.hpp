#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace ctepa::detail {

// Dormand-Prince 5(4) with the standard fourth-order continuous extension.
template <int N>
struct Dopri5Step {
  using Vec = Eigen::Matrix<double, N, 1>;

  double t0 = 0.0, h = 0.0;
  Vec y0, y1, f0, f1;
  Vec r1, r2, r3, r4, r5;
  double error = 0.0;

  double t1() const { return t0 + h; }

  Vec at(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

template <int N, typename Rhs>
Dopri5Step<N> dopri5_step(Rhs& rhs, double t, const Eigen::Matrix<double, N, 1>& y,
                          const Eigen::Matrix<double, N, 1>& f, double h, double rtol, double atol) {
  using Vec = Eigen::Matrix<double, N, 1>;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                   e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  const Vec& k1 = f;
  const Vec k2 = rhs(t + h / 5, Vec(y + h * a21 * k1));
  const Vec k3 = rhs(t + 3 * h / 10, Vec(y + h * (a31 * k1 + a32 * k2)));
  const Vec k4 = rhs(t + 4 * h / 5, Vec(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  const Vec k5 = rhs(t + 8 * h / 9, Vec(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
  const Vec k6 = rhs(t + h, Vec(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
  const Vec y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  const Vec k7 = rhs(t + h, y1);

  Dopri5Step<N> step;
  step.t0 = t;
  step.h = h;
  step.y0 = y;
  step.y1 = y1;
  step.f0 = k1;
  step.f1 = k7;
  const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  double sum = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
    sum += (err[i] / sc) * (err[i] / sc);
  }
  step.error = std::sqrt(sum / static_cast<double>(y.size()));

  step.r1 = y;
  step.r2 = y1 - y;
  step.r3 = h * k1 - step.r2;
  step.r4 = step.r2 - h * k7 - step.r3;
  step.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  return step;
}

// Step-size factor from an error estimate, with the usual safety margins.
inline double dopri5_factor(double error) {
  if (!(error > 0.0)) return 5.0;
  return std::clamp(0.9 * std::pow(error, -0.2), 0.2, 5.0);
}

}  // namespace ctepa::detail
