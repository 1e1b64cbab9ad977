#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "ctepa/core.hpp"

namespace ctepa {

template <typename Scalar>
using State2 = Eigen::Matrix<Scalar, 2, 1>;

// Exact flow of the frozen system w' = k(1 - c s), s' = w - nu s through a
// given point.  Writing X for the offset from the equilibrium (nu/c, 1/c),
// X(t0 + tau) = e^{mu tau} [C(tau) X0 + F(tau) (M - mu) X0] with mu = -nu/2.
template <typename Scalar = double>
class LocalTrajectory {
 public:
  using State = State2<Scalar>;

  LocalTrajectory(Scalar c, Scalar nu, Scalar k, const State& start, Scalar t0 = Scalar(0))
      : c_(c), nu_(nu), k_(k), start_(start), t0_(t0) {
    using std::abs;
    using std::sqrt;
    const Scalar four_kc = 4 * k * c;
    const Scalar disc = nu * nu - four_kc;
    if (abs(disc) <= Scalar(kBorderlineTolerance) * four_kc) {
      branch_ = Branch::Borderline;
      rate_ = 0;
    } else if (disc > 0) {
      branch_ = Branch::Real;
      rate_ = sqrt(disc) / 2;
    } else {
      branch_ = Branch::Complex;
      rate_ = sqrt(-disc) / 2;
    }
    offset_ = State(start[0] - nu / c, start[1] - 1 / c);
    rotated_ = State(nu / 2 * offset_[0] - k * c * offset_[1], offset_[0] - nu / 2 * offset_[1]);
  }

  Scalar c() const { return c_; }
  Scalar nu() const { return nu_; }
  Scalar k() const { return k_; }
  Scalar t0() const { return t0_; }
  const State& start() const { return start_; }
  Branch branch() const { return branch_; }
  State equilibrium() const { return State(nu_ / c_, 1 / c_); }

  // Half the eigenvalue gap on the real branch, the rotation frequency on the
  // complex branch, zero on the borderline.
  Scalar rate() const { return rate_; }

  State operator()(Scalar t) const {
    const auto [ec, ef] = weights(t - t0_);
    return equilibrium() + ec * offset_ + ef * rotated_;
  }

  Scalar w(Scalar t) const { return (*this)(t)[0]; }
  Scalar s(Scalar t) const { return (*this)(t)[1]; }

  State velocity(Scalar t) const {
    const State x = (*this)(t);
    return State(k_ * (1 - c_ * x[1]), x[0] - nu_ * x[1]);
  }

  // w - nu s along the path; this is s'.
  Scalar drift(Scalar t) const {
    const auto [ec, ef] = weights(t - t0_);
    return ec * drift0() + ef * drift_rot();
  }

  // Coefficients of the path in the fundamental basis.  Real branch:
  //   s = 1/c + a1 l1 e^{l1 tau} + a2 l2 e^{l2 tau},  w = nu/c - kc (a1 e^{l1 tau} + a2 e^{l2 tau}).
  // Complex branch:
  //   w = nu/c - e^{-nu tau/2} kc (a1 cos + a2 sin),
  //   s = 1/c + e^{-nu tau/2} ((-a1 nu/2 + a2 theta) cos - (a1 theta + a2 nu/2) sin).
  // Borderline: s = 1/c + (a1 + a2 tau) e^{-nu tau/2}.
  Scalar a1() const { return basis().first; }
  Scalar a2() const { return basis().second; }

  // Next time strictly beyond t0 (forward if direction > 0, backward
  // otherwise) at which w - nu s vanishes.
  std::optional<Scalar> next_turn(int direction) const {
    using std::atan2;
    using std::abs;
    const Scalar a = drift0();
    const Scalar b = drift_rot();
    const Scalar sign = direction > 0 ? Scalar(1) : Scalar(-1);
    std::optional<Scalar> tau;
    switch (branch_) {
      case Branch::Complex: {
        // a cos(x) + (b/theta) sin(x) vanishes at x = phase + pi/2 + n pi.
        const Scalar pi = std::numbers::pi_v<Scalar>;
        const Scalar phase = atan2(b / rate_, a);
        const Scalar base = phase + pi / 2;
        const Scalar eps = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * (1 + abs(base));
        Scalar x = base;
        if (sign > 0) {
          while (x <= eps) x += pi;
          while (x - pi > eps) x -= pi;
        } else {
          while (x >= -eps) x -= pi;
          while (x + pi < -eps) x += pi;
        }
        tau = x / rate_;
        break;
      }
      case Branch::Real: {
        if (b == 0) break;
        const Scalar ratio = -a * rate_ / b;
        if (abs(ratio) >= 1) break;
        const Scalar cand = std::atanh(ratio) / rate_;
        if (sign * cand > Scalar(64) * std::numeric_limits<Scalar>::epsilon() / rate_) tau = cand;
        break;
      }
      case Branch::Borderline: {
        if (b == 0) break;
        const Scalar cand = -a / b;
        if (sign * cand > 0) tau = cand;
        break;
      }
    }
    if (!tau) return std::nullopt;
    return t0_ + *tau;
  }

 private:
  Scalar drift0() const { return offset_[0] - nu_ * offset_[1]; }
  Scalar drift_rot() const { return rotated_[0] - nu_ * rotated_[1]; }

  // e^{mu tau} C(tau) and e^{mu tau} F(tau).
  std::pair<Scalar, Scalar> weights(Scalar tau) const {
    using std::exp;
    const Scalar decay = exp(-nu_ / 2 * tau);
    switch (branch_) {
      case Branch::Real:
        return {decay * std::cosh(rate_ * tau), decay * std::sinh(rate_ * tau) / rate_};
      case Branch::Complex:
        return {decay * std::cos(rate_ * tau), decay * std::sin(rate_ * tau) / rate_};
      case Branch::Borderline:
        break;
    }
    return {decay, decay * tau};
  }

  std::pair<Scalar, Scalar> basis() const {
    const Scalar kc = k_ * c_;
    const Scalar w0 = offset_[0];
    const Scalar s0 = offset_[1];
    switch (branch_) {
      case Branch::Real: {
        const Scalar l1 = -nu_ / 2 + rate_;
        const Scalar l2 = -nu_ / 2 - rate_;
        const Scalar first = (s0 + l2 * w0 / kc) / (l1 - l2);
        return {first, -w0 / kc - first};
      }
      case Branch::Complex: {
        const Scalar first = -w0 / kc;
        return {first, (s0 + first * nu_ / 2) / rate_};
      }
      case Branch::Borderline:
        break;
    }
    return {s0, w0 - nu_ * s0 / 2};
  }

  Scalar c_, nu_, k_;
  State start_;
  Scalar t0_;
  Branch branch_;
  Scalar rate_;
  State offset_;
  State rotated_;
};

}  // namespace ctepa
