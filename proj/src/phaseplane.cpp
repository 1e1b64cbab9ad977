#include "ctepa/phaseplane.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ctepa/detail/roots.hpp"
#include "ctepa/errors.hpp"

namespace ctepa {

namespace {

using std::numbers::pi;

double time_tolerance(double t) { return 1e-15 * (1.0 + std::abs(t)); }

// Zero of s along `path` inside [lo, hi], where s(lo) <= 0 < s(hi).
double zero_of_s(const LocalTrajectory<double>& path, double lo, double hi) {
  return detail::safeguarded_newton([&](double t) { return path.s(t); },
                                    [&](double t) { return path.drift(t); }, lo, hi,
                                    0.5 * (lo + hi), time_tolerance(hi));
}

void stop(CornerChain& chain, std::string reason, bool admissibility) {
  chain.stop_reason = std::move(reason);
  chain.stop_is_admissibility = admissibility;
}

}  // namespace

LocalTrajectory<double> local_trajectory(double c, double nu, double k, double w0, double s0, double t0) {
  return LocalTrajectory<double>(c, nu, k, State2<double>(w0, s0), t0);
}

double quarter_gain(double c, double nu, double k) {
  const Spectral sp = spectral(c, nu, k);
  switch (sp.branch) {
    case Branch::Real: {
      const double gap = sp.lambda1 - sp.lambda2;
      const double log_ratio = std::log1p(-gap / sp.lambda1);  // log(lambda2 / lambda1)
      return std::exp(nu * log_ratio / (2.0 * gap));
    }
    case Branch::Complex:
      return std::exp(nu * std::atan(2.0 * sp.theta / nu) / (2.0 * sp.theta));
    case Branch::Borderline:
      break;
  }
  return std::numbers::e;
}

double quarter_time(double c, double nu, double k) {
  const Spectral sp = spectral(c, nu, k);
  switch (sp.branch) {
    case Branch::Real: {
      const double gap = sp.lambda1 - sp.lambda2;
      return -std::log1p(-gap / sp.lambda1) / gap;
    }
    case Branch::Complex:
      return -std::atan(2.0 * sp.theta / nu) / sp.theta;
    case Branch::Borderline:
      break;
  }
  return -2.0 / nu;
}

std::optional<double> half_turn_gain(double c, double nu, double k) {
  const Spectral sp = spectral(c, nu, k);
  if (sp.branch != Branch::Complex) return std::nullopt;
  const double phase = pi - std::atan(2.0 * sp.theta / nu);
  return std::exp(nu * phase / (2.0 * sp.theta));
}

std::optional<double> half_turn_time(double c, double nu, double k) {
  const Spectral sp = spectral(c, nu, k);
  if (sp.branch != Branch::Complex) return std::nullopt;
  return -(pi - std::atan(2.0 * sp.theta / nu)) / sp.theta;
}

const Corner& CornerChain::at(int step) const {
  if (step == 1) return step1;
  const std::optional<Corner>* slot = nullptr;
  if (step == 2) slot = &step2;
  if (step == 3) slot = &step3;
  if (step == 4) slot = &step4;
  if (slot == nullptr) throw DomainError("corner step must be 1..4");
  if (*slot) return **slot;
  if (stop_is_admissibility) throw InadmissibleError(stop_reason);
  throw DomainError(stop_reason);
}

double CornerChain::star_w() const {
  if (w_star) return *w_star;
  if (stop_is_admissibility) throw InadmissibleError(stop_reason);
  throw DomainError(stop_reason);
}

double CornerChain::star_t() const {
  star_w();
  return *t_star;
}

CornerChain subcritical_corners(const Params& p) {
  const Regime regime = classify_regime(p);
  const double k = p.k;
  CornerChain chain;

  chain.step1.s = 1.0 / p.c_plus;
  chain.step1.t = quarter_time(p.c_plus, p.nu_plus, k);
  chain.step1.w = p.nu_plus / p.c_plus - std::sqrt(k / p.c_plus) * quarter_gain(p.c_plus, p.nu_plus, k);

  if (regime.sub == SubScenario::I) {
    stop(chain, "scenario I: s2 undefined", false);
    return chain;
  }
  const auto gain2 = half_turn_gain(p.c_plus, p.nu_minus, k);
  if (!gain2) {
    stop(chain, "borderline spectrum: C2 does not turn, s2 undefined", false);
    return chain;
  }
  Corner c2;
  c2.s = 1.0 / p.c_plus + (p.nu_minus / p.c_plus - chain.step1.w) * *gain2 / std::sqrt(k * p.c_plus);
  c2.w = p.nu_minus * c2.s;
  c2.t = chain.step1.t + *half_turn_time(p.c_plus, p.nu_minus, k);
  chain.step2 = c2;
  if (!(c2.s > 1.0 / p.c_minus)) {
    stop(chain, "inadmissible: AC1 fails", true);
    return chain;
  }

  Corner c3;
  c3.s = 1.0 / p.c_minus;
  c3.w = p.nu_minus / p.c_minus +
         std::sqrt(k * p.c_minus) * (c2.s - 1.0 / p.c_minus) * quarter_gain(p.c_minus, p.nu_minus, k);
  c3.t = c2.t + quarter_time(p.c_minus, p.nu_minus, k);
  chain.step3 = c3;
  if (!(c3.w > p.nu_plus / p.c_minus)) {
    stop(chain, "inadmissible: AC2 fails", true);
    return chain;
  }

  const auto last = local_trajectory(p.c_minus, p.nu_plus, k, c3.w, c3.s, c3.t);
  double lo = 0.0;
  if (regime.label == Alignment::Weak) {
    const auto gain4 = half_turn_gain(p.c_minus, p.nu_plus, k);
    if (!gain4) {
      stop(chain, "borderline spectrum: C4 does not turn, s4 undefined", false);
      return chain;
    }
    Corner c4;
    c4.s = 1.0 / p.c_minus - (c3.w - p.nu_plus / p.c_minus) * *gain4 / std::sqrt(k * p.c_minus);
    c4.w = p.nu_plus * c4.s;
    c4.t = c3.t + *half_turn_time(p.c_minus, p.nu_plus, k);
    chain.step4 = c4;
    if (c4.s > 0.0) {
      stop(chain, "inadmissible: AC3 fails", true);
      return chain;
    }
    lo = c4.t;
  } else {
    stop(chain, "median alignment: C4 does not turn, s4 undefined", false);
    const Spectral sp = spectral(p.c_minus, p.nu_plus, k);
    double span = 1.0 / std::abs(sp.lambda1);
    lo = c3.t - span;
    for (int i = 0; i < 200 && last.s(lo) > 0.0; ++i) {
      span *= 2.0;
      lo = c3.t - span;
    }
    if (last.s(lo) > 0.0) throw InvariantViolation("C4 never reaches s = 0");
  }
  chain.t_star = zero_of_s(last, lo, c3.t);
  chain.w_star = last.w(*chain.t_star);
  return chain;
}

CornerChain supercritical_corners(const Params& p) {
  const Regime regime = classify_regime(p);
  const double k = p.k;
  CornerChain chain;

  chain.step1.s = 1.0 / p.c_minus;
  chain.step1.t = quarter_time(p.c_minus, p.nu_minus, k);
  chain.step1.w = p.nu_minus / p.c_minus - std::sqrt(k / p.c_minus) * quarter_gain(p.c_minus, p.nu_minus, k);

  if (regime.sup == SupScenario::III) {
    stop(chain, "scenario III: s~2 undefined", false);
    return chain;
  }
  const auto gain2 = half_turn_gain(p.c_minus, p.nu_plus, k);
  if (!gain2) {
    stop(chain, "borderline spectrum: C~2 does not turn, s~2 undefined", false);
    return chain;
  }
  Corner c2;
  c2.s = 1.0 / p.c_minus + (p.nu_plus / p.c_minus - chain.step1.w) * *gain2 / std::sqrt(k * p.c_minus);
  c2.w = p.nu_plus * c2.s;
  c2.t = chain.step1.t + *half_turn_time(p.c_minus, p.nu_plus, k);
  chain.step2 = c2;

  Corner c3;
  c3.s = 1.0 / p.c_plus;
  c3.w = p.nu_plus / p.c_plus +
         std::sqrt(k * p.c_plus) * (c2.s - 1.0 / p.c_plus) * quarter_gain(p.c_plus, p.nu_plus, k);
  c3.t = c2.t + quarter_time(p.c_plus, p.nu_plus, k);
  chain.step3 = c3;

  const Spectral sp = spectral(p.c_plus, p.nu_minus, k);
  if (sp.branch != Branch::Complex) throw InvariantViolation("C~4 requires an oscillatory spectrum");
  const auto last = local_trajectory(p.c_plus, p.nu_minus, k, c3.w, c3.s, c3.t);
  const double lo = c3.t - pi / (2.0 * sp.theta);
  if (!(last.s(lo) <= 0.0)) throw InvariantViolation("C~4 does not reach s = 0 within a quarter period");
  chain.t_star = zero_of_s(last, lo, c3.t);
  chain.w_star = last.w(*chain.t_star);
  return chain;
}

LocalConstants local_constants(const Params& p) {
  const double k = p.k;
  LocalConstants out;
  const Spectral pp = spectral(p.c_plus, p.nu_plus, k);
  if (pp.branch == Branch::Complex) {
    out.z1 = quarter_gain(p.c_plus, p.nu_plus, k);
  } else {
    out.eta1 = std::sqrt(k / p.c_plus) * quarter_gain(p.c_plus, p.nu_plus, k);
  }
  out.z2 = half_turn_gain(p.c_plus, p.nu_minus, k);
  const Spectral mm = spectral(p.c_minus, p.nu_minus, k);
  if (mm.branch == Branch::Complex) {
    out.z3 = quarter_gain(p.c_minus, p.nu_minus, k);
  } else {
    out.eta3 = std::sqrt(k * p.c_minus) * quarter_gain(p.c_minus, p.nu_minus, k);
  }
  out.z4 = half_turn_gain(p.c_minus, p.nu_plus, k);
  return out;
}

CornerSet compute_corners(const Params& p) {
  return CornerSet{p, classify_regime(p), subcritical_corners(p), supercritical_corners(p), local_constants(p)};
}

std::string Admissibility::closure() const {
  if (!applicable) return "none";
  return ac3_required ? "AC1+AC2+AC3" : "AC1+AC2";
}

std::string Admissibility::failure() const {
  if (closes()) return {};
  std::ostringstream os;
  os.precision(17);
  const auto describe = [&](const char* name, const std::optional<Inequality>& in) {
    os << "inadmissible parameters: " << name << " fails";
    if (in) os << " (lhs=" << in->lhs << (in->strict ? " must be < " : " must be <= ") << "rhs=" << in->rhs << ")";
  };
  if (!ac1) {
    describe("AC1", ac1e);
  } else if (!ac2) {
    describe("AC2", ac2e);
  } else {
    describe("AC3", ac3e);
  }
  return os.str();
}

Admissibility admissibility(const CornerSet& corners) {
  const Params& p = corners.params;
  const double k = p.k;
  Admissibility out;
  out.applicable = corners.regime.sub == SubScenario::II;
  out.ac3_required = corners.regime.label == Alignment::Weak;

  if (out.applicable) {
    const LocalConstants& z = corners.constants;
    if (!z.z2) {
      out.ac1 = out.ac2 = out.ac3 = false;
    } else {
      const double w1 = corners.sub.step1.w;
      out.ac1e = Inequality{1.0 / p.c_minus - 1.0 / p.c_plus,
                            (p.nu_minus / p.c_plus - w1) * *z.z2 / std::sqrt(k * p.c_plus), true};
      const double s2 = 1.0 / p.c_plus + out.ac1e->rhs;
      const double gain3 = z.z3 ? std::sqrt(k * p.c_minus) * *z.z3 : *z.eta3;
      out.ac2e = Inequality{p.nu_plus - p.nu_minus, p.c_minus * (s2 - 1.0 / p.c_minus) * gain3, true};
      out.ac1 = out.ac1e->holds();
      out.ac2 = out.ac2e->holds();
      out.ac3 = out.ac2;
      if (out.ac3_required && z.z4 && z.z1 && z.z3) {
        const double w3 = p.nu_minus / p.c_minus + (s2 - 1.0 / p.c_minus) * gain3;
        out.ac3e = Inequality{1.0 / std::sqrt(p.c_minus), (w3 - p.nu_plus / p.c_minus) * *z.z4 / std::sqrt(k), false};
        const double z1 = *z.z1, z2 = *z.z2, z3 = *z.z3, z4 = *z.z4;
        const double lhs =
            (p.nu_plus - p.nu_minus) / std::sqrt(k * p.c_minus) *
                (1.0 / p.c_minus + std::sqrt(p.c_minus / (p.c_plus * p.c_plus * p.c_plus)) * z2 * z3) * z4 +
            (1.0 / p.c_minus - 1.0 / p.c_plus) * (z3 * z4 + 1.0);
        out.ac3_explicit = Inequality{lhs, (z1 * z2 * z3 * z4 - 1.0) / p.c_plus, false};
        out.ac3 = out.ac3e->holds();
      }
    }
  }

  if (corners.regime.sup == SupScenario::IV && corners.sup.step2) {
    out.sup_s2 = corners.sup.step2->s > 1.0 / p.c_plus;
    out.sup_w3 = corners.sup.step3->w > p.nu_minus / p.c_plus;
    out.sup_wstar = corners.sup.w_star.value_or(0.0) > p.nu_minus / (2.0 * p.c_plus);
  }
  return out;
}

double g_flat(const Params& p) {
  if (classify_regime(p).sub != SubScenario::I) throw DomainError("g_flat: undefined in this scenario");
  const double root = std::sqrt(std::max(0.0, p.nu_minus * p.nu_minus - 4.0 * p.k * p.c_plus));
  return 2.0 * p.k * p.c_plus / (p.nu_minus + root);
}

double g_sharp(const Params& p) {
  if (classify_regime(p).sup != SupScenario::III) throw DomainError("g_sharp: undefined in this scenario");
  const double root = std::sqrt(std::max(0.0, p.nu_plus * p.nu_plus - 4.0 * p.k * p.c_minus));
  return 2.0 * p.k * p.c_minus / (p.nu_plus + root);
}

}  // namespace ctepa
