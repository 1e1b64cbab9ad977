#pragma once

#include <string_view>
#include <utility>

namespace ctepa {

// Bounds of the damped oscillator: force strength k, background density
// range [c_minus, c_plus] and alignment strength range [nu_minus, nu_plus].
struct Params {
  double k = 1.0;
  double c_minus = 1.0;
  double c_plus = 1.0;
  double nu_minus = 1.0;
  double nu_plus = 1.0;

  friend bool operator==(const Params&, const Params&) = default;
};

// Throws ConfigError naming the first violated inequality.
Params validate(double k, double c_minus, double c_plus, double nu_minus, double nu_plus);
Params validate(const Params& raw);

enum class Alignment { Weak, Median, Strong };
enum class SubScenario { I, II };
enum class SupScenario { III, IV };

struct Regime {
  Alignment label;
  SubScenario sub;
  SupScenario sup;
};

Regime classify_regime(const Params& p);

std::string_view to_string(Alignment a);
std::string_view to_string(SubScenario s);
std::string_view to_string(SupScenario s);

// (nu_minus, nu_plus) for a kernel bounded by [psi_minus, psi_plus] and total mass.
std::pair<double, double> nu_bounds(double psi_minus, double psi_plus, double mass);

enum class Branch { Real, Complex, Borderline };
std::string_view to_string(Branch b);

// Eigen-structure of [[0, -kc], [1, -nu]].  For the complex branch lambda1 and
// lambda2 both hold the real part -nu/2.
struct Spectral {
  Branch branch;
  double lambda1;
  double lambda2;
  double theta;
};

inline constexpr double kBorderlineTolerance = 1e-9;

Spectral spectral(double c, double nu, double k);

// Spectra of the four frozen systems; first sign picks c, second picks nu.
struct LocalSpectra {
  Spectral pp, pm, mp, mm;
};

LocalSpectra local_spectra(const Params& p);

}  // namespace ctepa
