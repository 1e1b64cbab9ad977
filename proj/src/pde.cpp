#include "ctepa/pde.hpp"

#include <algorithm>
#include <complex>
#include <limits>
#include <unsupported/Eigen/FFT>

#include "ctepa/detail/format.hpp"
#include "ctepa/errors.hpp"
#include "ctepa/parallel.hpp"

namespace ctepa::pde {

namespace {

using detail::format_double;
using Array = Eigen::ArrayXd;
using Spectrum = std::vector<std::complex<double>>;

double wrap(double x, double length) {
  const double r = std::fmod(x, length);
  return r < 0.0 ? r + length : r;
}

// Wavenumber of FFT bin j on an M-point grid; the Nyquist bin maps to zero unless kept.
double wavenumber(int j, int M, double length, bool keep_nyquist) {
  if (2 * j == M && !keep_nyquist) return 0.0;
  const int n = j <= M / 2 ? j : j - M;
  return kTwoPi * n / length;
}

// Cloud-in-cell weights: left cell index and fraction to its right neighbour.
struct Cic {
  int j0, j1;
  double f;
};

Cic cic(double x, int M, double length) {
  const double xi = wrap(x, length) * M / length;
  int j0 = static_cast<int>(std::floor(xi));
  double f = xi - j0;
  if (j0 >= M) {
    j0 -= M;
  }
  return {j0, (j0 + 1) % M, f};
}

std::vector<double> deposit(const Array& x, const Array& q, int M, double length) {
  std::vector<double> g(static_cast<std::size_t>(M), 0.0);
  const double inv_h = M / length;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Cic w = cic(x[i], M, length);
    g[w.j0] += (1.0 - w.f) * q[i] * inv_h;
    g[w.j1] += w.f * q[i] * inv_h;
  }
  return g;
}

Array interpolate(const std::vector<double>& g, const Array& x, double length) {
  const int M = static_cast<int>(g.size());
  Array out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Cic w = cic(x[i], M, length);
    out[i] = (1.0 - w.f) * g[w.j0] + w.f * g[w.j1];
  }
  return out;
}

std::vector<double> spectral_derivative(const std::vector<double>& f, double length) {
  const int M = static_cast<int>(f.size());
  Eigen::FFT<double> fft;
  Spectrum hat;
  fft.fwd(hat, f);
  for (int j = 0; j < M; ++j) hat[j] *= std::complex<double>(0.0, wavenumber(j, M, length, false));
  std::vector<double> out;
  fft.inv(out, hat);
  return out;
}

struct Deriv {
  Array x, u, rho, G;
};

}  // namespace

KernelSpec KernelSpec::constant(double psi) { return {Family::Constant, psi, 0.0}; }

KernelSpec KernelSpec::cosine_bump(double mean, double amplitude) { return {Family::CosineBump, mean, amplitude}; }

double KernelSpec::operator()(double dx, double length) const {
  if (family == Family::Constant) return a;
  return a + b * std::cos(kTwoPi * dx / length);
}

void KernelSpec::check() const {
  if (!(std::isfinite(a) && std::isfinite(b))) throw ConfigError("kernel: non-finite parameters");
  if (family == Family::Constant && b != 0.0) throw ConfigError("kernel: constant family takes no amplitude");
  if (b < 0.0) throw ConfigError("kernel: amplitude must be nonnegative");
  if (!(psi_minus() > 0.0)) throw ConfigError("kernel: psi_minus = " + format_double(psi_minus()) + " must be positive");
}

BackgroundSpec BackgroundSpec::constant(double level) { return {Family::Constant, level, 0.0, 0.0}; }

BackgroundSpec BackgroundSpec::cosine_wave(double level, double amplitude, double speed) {
  return {Family::CosineWave, level, amplitude, speed};
}

double BackgroundSpec::raw(double x, double t, double length) const {
  if (family == Family::Constant) return level;
  return level * (1.0 + amplitude * std::cos(kTwoPi * x / length - speed * t));
}

double BackgroundSpec::raw_integral(double x, double t, double length) const {
  if (family == Family::Constant) return level * x;
  const double q = length / kTwoPi;
  return level * (x + amplitude * q * std::sin(x / q - speed * t));
}

double BackgroundSpec::raw_second_integral(double x, double t, double length) const {
  if (family == Family::Constant) return 0.5 * level * x * x;
  const double q = length / kTwoPi;
  return level * (0.5 * x * x - amplitude * q * q * std::cos(x / q - speed * t));
}

void BackgroundSpec::check() const {
  if (!(std::isfinite(level) && std::isfinite(amplitude) && std::isfinite(speed))) {
    throw ConfigError("background: non-finite parameters");
  }
  if (family == Family::Constant && (amplitude != 0.0 || speed != 0.0)) {
    throw ConfigError("background: constant family takes no amplitude or speed");
  }
  if (!(raw_minus() > 0.0)) throw ConfigError("background: lower bound must be positive");
}

FieldSolve solve_poisson(const std::vector<double>& rho, const std::vector<double>& c, double length) {
  const int M = static_cast<int>(rho.size());
  if (M < 2 || c.size() != rho.size()) throw ConfigError("poisson: grid needs at least 2 matching points");
  FieldSolve out;
  out.rho = rho;
  out.c = c;
  std::vector<double> r(M);
  for (int j = 0; j < M; ++j) r[j] = rho[j] - c[j];

  Eigen::FFT<double> fft;
  Spectrum rhat;
  fft.fwd(rhat, r);
  Spectrum phat(M), dhat(M), lhat(M);
  for (int j = 0; j < M; ++j) {
    if (j == 0) continue;
    const double kap = wavenumber(j, M, length, true);
    phat[j] = rhat[j] / (kap * kap);
    dhat[j] = std::complex<double>(0.0, wavenumber(j, M, length, false)) * phat[j];
    lhat[j] = kap * kap * phat[j];
  }
  fft.inv(out.phi, phat);
  fft.inv(out.dphi, dhat);

  // -phi'' rebuilt from phi against the zero-mean right-hand side.
  std::vector<double> lap;
  fft.inv(lap, lhat);
  double mean_r = 0.0, mean_d = 0.0;
  for (int j = 0; j < M; ++j) {
    mean_r += r[j] / M;
    mean_d += out.dphi[j] / M;
  }
  for (int j = 0; j < M; ++j) out.residual = std::max(out.residual, std::abs(lap[j] - (r[j] - mean_r)));
  out.mean_dphi = mean_d;
  return out;
}

Model::Model(Domain domain, double total_mass) : domain_(std::move(domain)), mass_(total_mass) {
  if (!(domain_.k > 0.0)) throw ConfigError("pde: k must be positive");
  if (!(domain_.length > 0.0)) throw ConfigError("pde: length must be positive");
  if (domain_.grid < 2) throw ConfigError("pde: field grid needs at least 2 points");
  if (!(mass_ > 0.0)) throw ConfigError("pde: total mass must be positive");
  domain_.kernel.check();
  domain_.background.check();
  const double f = background_factor(0.0);
  const double lo = domain_.background.raw_minus() / domain_.background.raw_plus();
  const double tol = 1e-9 * (1.0 + 1.0 / lo);
  if (f < lo - tol || f > 1.0 / lo + tol) {
    throw ConfigError("background: normalization factor " + format_double(f) + " outside [" + format_double(lo) +
                      ", " + format_double(1.0 / lo) + "]; its mean should match the mean density");
  }
}

double Model::background_factor(double t) const {
  const int M = domain_.grid;
  const double h = domain_.length / M;
  double integral = 0.0;
  for (int j = 0; j < M; ++j) integral += domain_.background.raw(j * h, t, domain_.length) * h;
  return mass_ / integral;
}

double Model::c(double x, double t) const {
  return background_factor(t) * domain_.background.raw(wrap(x, domain_.length), t, domain_.length);
}

Params Model::params() const {
  const double f = background_factor(0.0);
  const auto [nu_lo, nu_hi] = nu_bounds(domain_.kernel.psi_minus(), domain_.kernel.psi_plus(), mass_);
  return validate(domain_.k, f * domain_.background.raw_minus(), f * domain_.background.raw_plus(), nu_lo, nu_hi);
}

void Model::alignment(const ParticleState& s, Array& conv, Array& force, AlignmentSum mode) const {
  const Eigen::Index n = s.x.size();
  const double L = domain_.length;
  conv.resize(n);
  force.resize(n);
  if (mode == AlignmentSum::Grid) {
    const int M = domain_.grid;
    const double h = L / M;
    std::vector<double> kernel(M);
    for (int j = 0; j < M; ++j) kernel[j] = domain_.kernel(j * h, L);
    const std::vector<double> rho_g = deposit(s.x, s.m, M, L);
    const std::vector<double> mu_g = deposit(s.x, s.m * s.u, M, L);
    Eigen::FFT<double> fft;
    Spectrum khat, rhat, mhat;
    fft.fwd(khat, kernel);
    fft.fwd(rhat, rho_g);
    fft.fwd(mhat, mu_g);
    for (int j = 0; j < M; ++j) {
      rhat[j] *= khat[j] * h;
      mhat[j] *= khat[j] * h;
    }
    std::vector<double> conv_g, cmu_g;
    fft.inv(conv_g, rhat);
    fft.inv(cmu_g, mhat);
    conv = interpolate(conv_g, s.x, L);
    force = interpolate(cmu_g, s.x, L) - s.u * conv;
    return;
  }
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (static_cast<std::size_t>(n) + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t chunk) {
    const Eigen::Index begin = static_cast<Eigen::Index>(chunk * kChunk);
    const Eigen::Index end = std::min<Eigen::Index>(n, begin + kChunk);
    for (Eigen::Index i = begin; i < end; ++i) {
      double cv = 0.0, fv = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = s.m[j] * domain_.kernel(s.x[i] - s.x[j], L);
        cv += w;
        fv += w * (s.u[j] - s.u[i]);
      }
      conv[i] = cv;
      force[i] = fv;
    }
  });
}

FieldSolve Model::field(const Array& x, const Array& m, double t) const {
  const int M = domain_.grid;
  const double h = domain_.length / M;
  const double f = background_factor(t);
  std::vector<double> c(M);
  for (int j = 0; j < M; ++j) c[j] = f * domain_.background.raw(j * h, t, domain_.length);
  return solve_poisson(deposit(x, m, M, domain_.length), c, domain_.length);
}

Array Model::poisson_force(const Array& x, const Array& m, double t, FieldMode mode) const {
  if (mode == FieldMode::Grid) return interpolate(field(x, m, t).dphi, x, domain_.length);
  // phi'' = c - rho: between sheets dphi grows by the background integral and
  // drops by m_i across sheet i, where it takes the mean of both sides.
  const Eigen::Index n = x.size();
  const double L = domain_.length;
  const double f = background_factor(t);
  const BackgroundSpec& bg = domain_.background;
  const auto C = [&](double y) { return f * bg.raw_integral(y, t, L); };
  const auto D = [&](double y) { return f * bg.raw_second_integral(y, t, L); };
  Array F(n);
  F[0] = 0.0;
  double below = 0.5 * m[0];
  for (Eigen::Index i = 1; i < n; ++i) {
    F[i] = C(x[i]) - C(x[0]) - below - 0.5 * m[i];
    below += m[i];
  }
  // Fix the constant so dphi has zero mean over one period.
  double integral = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = x[i];
    const double b = i + 1 < n ? x[i + 1] : x[0] + L;
    integral += (F[i] - 0.5 * m[i]) * (b - a) + D(b) - D(a) - C(a) * (b - a);
  }
  return F - integral / L;
}

std::pair<Model, ParticleState> init(const std::vector<double>& rho0, const std::vector<double>& u0, Domain domain) {
  const std::size_t n = rho0.size();
  if (n < 2 || u0.size() != n) throw ConfigError("pde: need at least 2 matching rho0 and u0 samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(rho0[i]) || !std::isfinite(u0[i])) throw ConfigError("pde: non-finite initial sample");
    if (!(rho0[i] > 0.0)) {
      throw DomainError("pde: rho0 = " + format_double(rho0[i]) + " at sample " + std::to_string(i) +
                        " is not positive; vacuum characteristics follow the scalar G dynamics");
    }
  }
  if (domain.grid == 0) domain.grid = static_cast<int>(n);
  const double dx = domain.length / static_cast<double>(n);

  ParticleState s;
  s.x = Array::LinSpaced(static_cast<Eigen::Index>(n), 0.0, dx * static_cast<double>(n - 1));
  s.u = Eigen::Map<const Array>(u0.data(), static_cast<Eigen::Index>(n));
  s.rho = Eigen::Map<const Array>(rho0.data(), static_cast<Eigen::Index>(n));
  s.m = s.rho * dx;
  Model model(std::move(domain), s.m.sum());

  Array conv, force;
  model.alignment(s, conv, force);
  const std::vector<double> du = spectral_derivative(u0, model.domain().length);
  s.G = Eigen::Map<const Array>(du.data(), static_cast<Eigen::Index>(n)) + conv;
  return {std::move(model), std::move(s)};
}

double stable_dt(const Model& model, const ParticleState& s) {
  const double nu_plus = model.domain().kernel.psi_plus() * model.total_mass();
  return 0.1 / (s.G.abs().maxCoeff() + nu_plus);
}

namespace {

Deriv rhs(const Model& model, const ParticleState& s, const Schemes& schemes) {
  Array conv, align;
  model.alignment(s, conv, align, schemes.alignment);
  const Array dphi = model.poisson_force(s.x, s.m, s.t, schemes.field);
  const double f = model.background_factor(s.t);
  const Domain& dom = model.domain();
  Array c(s.x.size());
  for (Eigen::Index i = 0; i < s.x.size(); ++i) c[i] = f * dom.background.raw(wrap(s.x[i], dom.length), s.t, dom.length);
  const double k = model.domain().k;
  Deriv d;
  d.x = s.u;
  d.u = -k * dphi + align;
  d.rho = -s.rho * (s.G - conv);
  d.G = -s.G * (s.G - conv) + k * (s.rho - c);
  return d;
}

ParticleState advance(const ParticleState& s, const Deriv& d, double h) {
  ParticleState out = s;
  out.t = s.t + h;
  out.x = s.x + h * d.x;
  out.u = s.u + h * d.u;
  out.rho = s.rho + h * d.rho;
  out.G = s.G + h * d.G;
  return out;
}

}  // namespace

ParticleState step(const Model& model, const ParticleState& s, double dt, const Schemes& schemes) {
  const double bound = stable_dt(model, s);
  if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12)) {
    throw NumericalError("pde: dt = " + format_double(dt) + " violates the stability bound " + format_double(bound));
  }
  const Deriv k1 = rhs(model, s, schemes);
  const Deriv k2 = rhs(model, advance(s, k1, dt / 2), schemes);
  const Deriv k3 = rhs(model, advance(s, k2, dt / 2), schemes);
  const Deriv k4 = rhs(model, advance(s, k3, dt), schemes);
  ParticleState out = s;
  out.t = s.t + dt;
  out.x = s.x + dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
  out.u = s.u + dt / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u);
  out.rho = s.rho + dt / 6 * (k1.rho + 2 * k2.rho + 2 * k3.rho + k4.rho);
  out.G = s.G + dt / 6 * (k1.G + 2 * k2.G + 2 * k3.G + k4.G);
  if (!out.x.allFinite() || !out.u.allFinite() || !out.rho.allFinite() || !out.G.allFinite()) {
    throw NumericalError("pde: non-finite state at t = " + format_double(out.t));
  }
  return out;
}

std::optional<std::size_t> crossing(const ParticleState& s, double length) {
  const Eigen::Index n = s.x.size();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (!(s.x[i + 1] > s.x[i])) return static_cast<std::size_t>(i);
  }
  if (n > 1 && !(s.x[0] + length > s.x[n - 1])) return static_cast<std::size_t>(n - 1);
  return std::nullopt;
}

double g_relation_residual(const Model& model, const ParticleState& s) {
  const Eigen::Index n = s.x.size();
  const double L = model.domain().length;
  Array conv, force;
  model.alignment(s, conv, force);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index im = (i + n - 1) % n, ip = (i + 1) % n;
    const double xm = s.x[im] - (i == 0 ? L : 0.0);
    const double xp = s.x[ip] + (i == n - 1 ? L : 0.0);
    const double du = (s.u[ip] - s.u[im]) / (xp - xm);
    worst = std::max(worst, std::abs(s.G[i] - conv[i] - du));
  }
  return worst;
}

std::string_view to_string(Outcome::Kind k) { return k == Outcome::Kind::Smooth ? "smooth" : "blowup"; }

Outcome run(const Model& model, ParticleState state, const RunControls& ctl,
            const std::function<void(const ParticleState&)>& on_step) {
  if (!(ctl.T >= state.t) || !std::isfinite(ctl.T)) throw ConfigError("pde: T must be finite and not before t0");
  if (!(ctl.dt > 0.0)) throw ConfigError("pde: dt must be positive");
  std::vector<double> snaps = ctl.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  auto next_snap = std::lower_bound(snaps.begin(), snaps.end(), state.t);

  Outcome out;
  const double L = model.domain().length;
  const double p0 = state.momentum();
  const double half = state.t + 0.5 * (ctl.T - state.t);
  double momentum_scale = (state.m * state.u.abs()).sum();

  const auto monitor = [&](const ParticleState& s) {
    const double max_rho = s.rho.maxCoeff();
    out.history.push_back({s.t, max_rho, s.G.minCoeff(), s.momentum()});
    out.sup_rho = std::max(out.sup_rho, max_rho);
    if (s.t <= half) out.sup_rho_first_half = out.sup_rho;
    momentum_scale = std::max(momentum_scale, (s.m * s.u.abs()).sum());
    if (momentum_scale > 0.0) {
      out.max_momentum_drift = std::max(out.max_momentum_drift, std::abs(s.momentum() - p0) / momentum_scale);
    }
    out.max_poisson_residual = std::max(out.max_poisson_residual, model.field(s.x, s.m, s.t).residual);
    const double f = model.background_factor(s.t);
    out.factor_min = std::min(out.factor_min, f);
    out.factor_max = std::max(out.factor_max, f);
    while (next_snap != snaps.end() && *next_snap <= s.t + 1e-12 * (1.0 + std::abs(s.t))) {
      out.snapshots.push_back({s.t, s.x, s.u, s.rho, s.G});
      ++next_snap;
    }
    if (on_step) on_step(s);
  };
  out.factor_min = out.factor_max = model.background_factor(state.t);
  monitor(state);

  const auto blown = [&](const ParticleState& s) {
    Eigen::Index imax = 0, imin = 0;
    const double max_rho = s.rho.maxCoeff(&imax);
    const double min_G = s.G.minCoeff(&imin);
    std::optional<Eigen::Index> label;
    if (max_rho > ctl.rho_blow) {
      label = imax;
      out.reason = "density";
    } else if (min_G < -ctl.g_blow) {
      label = imin;
      out.reason = "G";
    } else if (const auto i = crossing(s, L)) {
      const Eigen::Index a = static_cast<Eigen::Index>(*i), b = (a + 1) % s.x.size();
      label = s.rho[a] >= s.rho[b] ? a : b;
      out.reason = "crossing";
    }
    if (!label) return false;
    out.kind = Outcome::Kind::Blowup;
    out.label = static_cast<std::size_t>(*label);
    out.x_star = wrap(s.x[*label], L);
    // s = 1/rho closes with slope w = G/rho, so the gap is about 1/|G|.
    const double g = s.G[*label];
    out.t_star = out.reason != "crossing" && g < 0.0 ? s.t - 1.0 / g : s.t;
    return true;
  };

  while (!blown(state) && state.t < ctl.T) {
    if (out.steps >= ctl.max_steps) throw NumericalError("pde: step budget exhausted at t = " + format_double(state.t));
    double dt = std::min({ctl.dt, stable_dt(model, state), ctl.T - state.t});
    if (next_snap != snaps.end() && *next_snap > state.t) dt = std::min(dt, *next_snap - state.t);
    const double target = state.t + dt;
    state = step(model, state, dt, ctl.schemes);
    // Land exactly on T and on snapshot times.
    if (std::abs(target - ctl.T) <= 1e-12 * (1.0 + std::abs(ctl.T))) state.t = ctl.T;
    ++out.steps;
    monitor(state);
  }
  out.t_end = state.t;
  return out;
}

}  // namespace ctepa::pde
