#include "ctepa/core.hpp"

#include <cmath>
#include <string>

#include "ctepa/errors.hpp"

namespace ctepa {

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
  if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace

Params validate(double k, double c_minus, double c_plus, double nu_minus, double nu_plus) {
  require_positive(k, "k");
  require_positive(c_minus, "c_minus");
  require_positive(c_plus, "c_plus");
  if (c_minus > c_plus) throw ConfigError("c_minus exceeds c_plus");
  require_positive(nu_minus, "nu_minus");
  require_positive(nu_plus, "nu_plus");
  if (nu_minus > nu_plus) throw ConfigError("nu_minus exceeds nu_plus");
  return Params{k, c_minus, c_plus, nu_minus, nu_plus};
}

Params validate(const Params& raw) {
  return validate(raw.k, raw.c_minus, raw.c_plus, raw.nu_minus, raw.nu_plus);
}

Regime classify_regime(const Params& p) {
  const bool overdamped_sub = p.nu_minus >= 2.0 * std::sqrt(p.k * p.c_plus);
  const bool overdamped_sup = p.nu_plus >= 2.0 * std::sqrt(p.k * p.c_minus);
  Regime r{};
  r.label = overdamped_sub ? Alignment::Strong : (overdamped_sup ? Alignment::Median : Alignment::Weak);
  r.sub = overdamped_sub ? SubScenario::I : SubScenario::II;
  r.sup = overdamped_sup ? SupScenario::III : SupScenario::IV;
  return r;
}

std::string_view to_string(Alignment a) {
  switch (a) {
    case Alignment::Weak: return "weak";
    case Alignment::Median: return "median";
    case Alignment::Strong: return "strong";
  }
  return "?";
}

std::string_view to_string(SubScenario s) { return s == SubScenario::I ? "I" : "II"; }
std::string_view to_string(SupScenario s) { return s == SupScenario::III ? "III" : "IV"; }

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Real: return "real";
    case Branch::Complex: return "complex";
    case Branch::Borderline: return "borderline";
  }
  return "?";
}

std::pair<double, double> nu_bounds(double psi_minus, double psi_plus, double mass) {
  require_positive(psi_minus, "psi_minus");
  require_positive(psi_plus, "psi_plus");
  require_positive(mass, "mass");
  if (psi_minus > psi_plus) throw ConfigError("psi_minus exceeds psi_plus");
  return {psi_minus * mass, psi_plus * mass};
}

Spectral spectral(double c, double nu, double k) {
  const double four_kc = 4.0 * k * c;
  const double disc = nu * nu - four_kc;
  Spectral out{};
  if (std::abs(disc) <= kBorderlineTolerance * four_kc) {
    out.branch = Branch::Borderline;
    out.lambda1 = out.lambda2 = -0.5 * nu;
    out.theta = 0.0;
  } else if (disc > 0.0) {
    out.branch = Branch::Real;
    // The fast root is cancellation free; the slow one follows from the product.
    out.lambda2 = -0.5 * (nu + std::sqrt(disc));
    out.lambda1 = k * c / out.lambda2;
    out.theta = 0.0;
  } else {
    out.branch = Branch::Complex;
    out.lambda1 = out.lambda2 = -0.5 * nu;
    out.theta = 0.5 * std::sqrt(-disc);
  }
  return out;
}

LocalSpectra local_spectra(const Params& p) {
  return LocalSpectra{spectral(p.c_plus, p.nu_plus, p.k), spectral(p.c_plus, p.nu_minus, p.k),
                      spectral(p.c_minus, p.nu_plus, p.k), spectral(p.c_minus, p.nu_minus, p.k)};
}

}  // namespace ctepa
