#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ctepa/core.hpp"

namespace ctepa::pde {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Alignment kernel on a torus of length `length`: psi(x) = a + b cos(2 pi x / length).
// The constant family has b = 0.
struct KernelSpec {
  enum class Family { Constant, CosineBump };
  Family family = Family::Constant;
  double a = 1.0;
  double b = 0.0;

  static KernelSpec constant(double psi);
  static KernelSpec cosine_bump(double mean, double amplitude);

  double psi_minus() const { return a - b; }
  double psi_plus() const { return a + b; }
  double operator()(double dx, double length) const;
  void check() const;  // ConfigError unless 0 < psi_minus <= psi_plus
};

// Background c(x, t) = level (1 + amplitude cos(2 pi (x / length) - speed t)),
// rescaled at every evaluation time so its integral equals the total mass.
struct BackgroundSpec {
  enum class Family { Constant, CosineWave };
  Family family = Family::Constant;
  double level = 1.0;
  double amplitude = 0.0;
  double speed = 0.0;

  static BackgroundSpec constant(double level);
  static BackgroundSpec cosine_wave(double level, double amplitude, double speed);

  double raw(double x, double t, double length) const;
  // First and second antiderivatives of raw in x.
  double raw_integral(double x, double t, double length) const;
  double raw_second_integral(double x, double t, double length) const;
  double raw_minus() const { return level * (1.0 - std::abs(amplitude)); }
  double raw_plus() const { return level * (1.0 + std::abs(amplitude)); }
  void check() const;
};

struct Domain {
  double k = 1.0;  // Poisson force strength
  double length = kTwoPi;
  int grid = 0;  // M, field grid size
  KernelSpec kernel;
  BackgroundSpec background;
};

struct ParticleState {
  double t = 0.0;
  Eigen::ArrayXd x, u, rho, G, m;
  std::size_t size() const { return static_cast<std::size_t>(x.size()); }
  double mass() const { return m.sum(); }
  double momentum() const { return (m * u).sum(); }
};

struct FieldSolve {
  std::vector<double> rho, c, phi, dphi;  // on the uniform grid
  double mean_dphi = 0.0;
  double residual = 0.0;  // max |-phi'' - (rho - c)| after the mean is removed
};

// Spectral solve of -phi'' = rho - c on a uniform periodic grid.
FieldSolve solve_poisson(const std::vector<double>& rho, const std::vector<double>& c, double length);

enum class AlignmentSum { Direct, Grid };

// Poisson force at particles: the exact field of point masses in a periodic
// background (cumulative mass), or the spectral grid solve with cloud-in-cell
// deposition and interpolation.
enum class FieldMode { Sheet, Grid };

struct Schemes {
  AlignmentSum alignment = AlignmentSum::Direct;
  FieldMode field = FieldMode::Sheet;
};

// Everything a step needs, built once by init.
class Model {
 public:
  Model(Domain domain, double total_mass);

  const Domain& domain() const { return domain_; }
  double total_mass() const { return mass_; }
  // Multiplicative factor applied to the raw background at time t.
  double background_factor(double t) const;
  double c(double x, double t) const;
  // Bounds implied by the kernel, the normalized background and the mass.
  Params params() const;

  // psi * rho at every particle, and the alignment force sum_j m_j psi(x_i - x_j)(u_j - u_i).
  void alignment(const ParticleState& s, Eigen::ArrayXd& conv, Eigen::ArrayXd& force,
                 AlignmentSum mode = AlignmentSum::Direct) const;
  FieldSolve field(const Eigen::ArrayXd& x, const Eigen::ArrayXd& m, double t) const;
  // dphi at the particles.  Sheet mode needs positions ordered within one period.
  Eigen::ArrayXd poisson_force(const Eigen::ArrayXd& x, const Eigen::ArrayXd& m, double t,
                               FieldMode mode = FieldMode::Sheet) const;

 private:
  Domain domain_;
  double mass_;
};

// Particles at the N grid points with masses rho0(x_i) dx; G from the spectral
// derivative of u0 plus the quadrature convolution.  grid = 0 means M = N.
std::pair<Model, ParticleState> init(const std::vector<double>& rho0, const std::vector<double>& u0, Domain domain);

// Largest dt allowed by the stability bound.
double stable_dt(const Model& model, const ParticleState& s);

// One RK4 step.  Throws NumericalError when dt exceeds the stability bound.
ParticleState step(const Model& model, const ParticleState& s, double dt, const Schemes& schemes = {});

// Index of the first particle that overtook its right neighbour, if any.
std::optional<std::size_t> crossing(const ParticleState& s, double length);

// max |G_i - (psi * rho)(x_i) - du/dx(x_i)| with du/dx from neighbour differences.
double g_relation_residual(const Model& model, const ParticleState& s);

struct RunControls {
  double T = 1.0;
  double dt = 1e-2;
  double rho_blow = 1e6;
  double g_blow = 1e6;
  std::vector<double> snapshot_times;
  Schemes schemes;
  std::size_t max_steps = 10'000'000;
};

struct Snapshot {
  double t = 0.0;
  Eigen::ArrayXd x, u, rho, G;
};

struct MonitorPoint {
  double t = 0.0, max_rho = 0.0, min_G = 0.0, momentum = 0.0;
};

struct Outcome {
  enum class Kind { Smooth, Blowup };
  Kind kind = Kind::Smooth;
  double t_end = 0.0;
  // Blowup only.
  std::optional<double> t_star;
  std::optional<double> x_star;
  std::optional<std::size_t> label;  // Lagrangian index attaining the blowup
  std::string reason;                // "density", "G" or "crossing"
  // Monitors.
  std::vector<MonitorPoint> history;
  std::vector<Snapshot> snapshots;
  double sup_rho = 0.0;
  double sup_rho_first_half = 0.0;
  double max_momentum_drift = 0.0;  // relative to the running max of sum m |u|
  double max_poisson_residual = 0.0;
  double factor_min = 1.0, factor_max = 1.0;
  std::size_t steps = 0;
};

std::string_view to_string(Outcome::Kind k);

// Integrates to T or until max rho > rho_blow, min G < -g_blow, or particles cross.
// `on_step` sees every accepted state, including the initial one.
Outcome run(const Model& model, ParticleState state, const RunControls& ctl,
            const std::function<void(const ParticleState&)>& on_step = {});

}  // namespace ctepa::pde
