#include "ctepa/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "ctepa/detail/format.hpp"
#include "ctepa/dynamics.hpp"
#include "ctepa/errors.hpp"
#include "ctepa/parallel.hpp"
#include "ctepa/pde.hpp"
#include "ctepa/phaseplane.hpp"
#include "ctepa/regions.hpp"

namespace ctepa::verify {

namespace {

using detail::format_double;
constexpr Alignment kAlignments[] = {Alignment::Weak, Alignment::Median, Alignment::Strong};

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

// Independent stream per (suite, index) so results never depend on scheduling.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t suite, std::uint64_t index) {
  std::seed_seq seq{seed, suite, index};
  return std::mt19937_64(seq);
}

// Parameters whose subcritical region exists.
Params admissible_params(std::mt19937_64& rng, Alignment a) {
  for (;;) {
    const Params p = sample_params(rng, a, 0.15, 0.2);
    if (admissibility(compute_corners(p)).closes()) return p;
  }
}

}  // namespace

Params sample_params(std::mt19937_64& rng, Alignment want, double c_gap, double nu_gap) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double k = 0.5 + 1.5 * u(rng);
    const double cm = 0.5 + u(rng);
    const double cp = cm * (1.0 + c_gap * u(rng));
    const double scale = 2.0 * std::sqrt(k * cm);
    const double nm = scale * (0.1 + 1.6 * u(rng));
    const double np = nm * (1.0 + nu_gap * u(rng));
    const Params p = validate(k, cm, cp, nm, np);
    if (classify_regime(p).label == want) return p;
  }
}

Result corners(const Options& opt) {
  if (!opt.oracle) throw ConfigError("verify corners: no oracle supplied");
  constexpr int kPerRegime = 200;
  std::vector<Params> ps;
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < kPerRegime; ++i) {
      auto rng = stream(opt.seed, 1, a * kPerRegime + i);
      ps.push_back(sample_params(rng, kAlignments[a]));
    }
  }
  struct Cell {
    int compared = 0, mismatches = 0;
    double worst = 0.0;
    std::string first;
  };
  std::vector<Cell> cells(ps.size());
  parallel_for(ps.size(), [&](std::size_t i) {
    const Params& p = ps[i];
    const CornerSet cs = compute_corners(p);
    const auto ref = opt.oracle(p);
    Cell& cell = cells[i];
    const auto check = [&](const char* key, std::optional<double> mine) {
      const bool in_ref = ref.count(key) > 0;
      ++cell.compared;
      if (in_ref != mine.has_value()) {
        ++cell.mismatches;
        if (cell.first.empty()) cell.first = std::string(key) + " reached by one side only";
        return;
      }
      if (!in_ref) return;
      const double err = std::abs(*mine - ref.at(key)) / std::max(1.0, std::abs(*mine));
      cell.worst = std::max(cell.worst, err);
      if (err >= 1e-6) {
        ++cell.mismatches;
        if (cell.first.empty()) cell.first = std::string(key) + " differs by " + sci(err);
      }
    };
    const auto s_of = [](const std::optional<Corner>& c) { return c ? std::optional(c->s) : std::nullopt; };
    const auto w_of = [](const std::optional<Corner>& c) { return c ? std::optional(c->w) : std::nullopt; };
    check("w1", cs.sub.step1.w);
    check("s2", s_of(cs.sub.step2));
    check("w3", w_of(cs.sub.step3));
    if (cs.regime.label == Alignment::Weak) check("s4", s_of(cs.sub.step4));
    check("w_star", cs.sub.w_star);
    check("wt1", cs.sup.step1.w);
    check("st2", s_of(cs.sup.step2));
    check("wt3", w_of(cs.sup.step3));
    check("wt_star", cs.sup.w_star);
  });
  Result r{1, "corners"};
  int compared = 0, mismatches = 0;
  double worst = 0.0;
  std::string first;
  for (const Cell& c : cells) {
    compared += c.compared;
    mismatches += c.mismatches;
    worst = std::max(worst, c.worst);
    if (first.empty()) first = c.first;
  }
  r.passed = mismatches == 0;
  r.summary = std::to_string(ps.size()) + " parameter sets, " + std::to_string(compared) +
              " corner comparisons, max scaled error " + sci(worst) + " (tolerance 1e-6), " +
              std::to_string(mismatches) + " mismatches" + (first.empty() ? "" : "; first: " + first);
  r.metrics = {{"params", static_cast<double>(ps.size())},
               {"comparisons", compared},
               {"mismatches", mismatches},
               {"max_error", worst}};
  return r;
}

Result level_sets(const Options& opt) {
  constexpr int kParams = 20;
  std::vector<Params> ps;
  for (int i = 0; i < kParams; ++i) {
    auto rng = stream(opt.seed, 2, i);
    ps.push_back(admissible_params(rng, kAlignments[i % 3]));
  }
  struct Cell {
    double worst = 0.0, worst_rel = 0.0;
    int curves = 0, samples = 0, over = 0;
    std::string worst_curve;
  };
  std::vector<Cell> cells(ps.size());
  parallel_for(ps.size(), [&](std::size_t i) {
    const Params& p = ps[i];
    const Thresholds th(p);
    std::vector<const Curve*> curves;
    for (const Curve& c : th.subcritical()->curves()) curves.push_back(&c);
    for (const Curve& c : th.supercritical().curves()) curves.push_back(&c);
    SimControls ctl;
    ctl.rtol = 1e-12;
    ctl.atol = 1e-14;
    ctl.h_max = 0.01;
    for (const Curve* curve : curves) {
      const LyapunovTable& table = curve->table;
      double a = std::min(curve->s_begin, curve->s_end), b = std::max(curve->s_begin, curve->s_end);
      if (!std::isfinite(b)) b = a + 4.0 / p.c_minus;
      a = std::max({a, table.s_lo(), 1e-6});
      b = std::min(b, table.s_hi());
      const double ta = table.time_at(a), tb = table.time_at(b);
      const double s0 = ta < tb ? a : b;
      const Trajectory traj = simulate_ws(p, constant_path(p, table.c(), table.nu()), table.curve_w(s0), s0,
                                          std::abs(tb - ta), ctl);
      Cell& cell = cells[i];
      ++cell.curves;
      for (const Sample& x : traj.samples) {
        if (x.s < a || x.s > b || !table.contains(x.s)) continue;
        const double L = std::abs(eval_L(table, x.w, x.s).value);
        ++cell.samples;
        cell.over += L >= 1e-7;
        cell.worst_rel = std::max(cell.worst_rel, L / std::max(1.0, std::abs(x.w)));
        if (L > cell.worst) {
          cell.worst = L;
          cell.worst_curve = curve->id;
        }
      }
    }
  });
  Result r{2, "level-sets"};
  double worst = 0.0, worst_rel = 0.0;
  int curves = 0, samples = 0, over = 0;
  std::string which;
  for (const Cell& c : cells) {
    curves += c.curves;
    samples += c.samples;
    over += c.over;
    worst_rel = std::max(worst_rel, c.worst_rel);
    if (c.worst > worst) {
      worst = c.worst;
      which = c.worst_curve;
    }
  }
  r.passed = worst < 1e-7;
  r.summary = std::to_string(kParams) + " parameter sets, " + std::to_string(curves) +
              " curves integrated numerically, sup |L| = " + sci(worst) + (which.empty() ? "" : " on " + which) +
              " (tolerance 1e-7); " + std::to_string(over) + " of " + std::to_string(samples) +
              " samples at or above it, sup |L|/max(1,|w|) = " + sci(worst_rel);
  r.metrics = {{"params", kParams}, {"curves", curves}, {"samples", samples},
               {"samples_over", over}, {"sup_L", worst}, {"sup_L_relative", worst_rel}};
  return r;
}

Result comparison(const Options& opt) {
  constexpr int kParams = 30, kStarts = 20;
  std::vector<Params> ps;
  for (int i = 0; i < kParams; ++i) {
    auto rng = stream(opt.seed, 3, i);
    ps.push_back(admissible_params(rng, kAlignments[i % 3]));
  }
  struct Cell {
    std::size_t episodes = 0, tested = 0, violations = 0;
  };
  std::vector<Cell> cells(ps.size());
  parallel_for(ps.size(), [&](std::size_t i) {
    const Params& p = ps[i];
    const Thresholds th(p);
    std::vector<const Curve*> curves;
    for (const Curve& c : th.subcritical()->curves()) curves.push_back(&c);
    for (const Curve& c : th.supercritical().curves()) curves.push_back(&c);
    auto rng = stream(opt.seed, 30, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int run = 0; run < kStarts; ++run) {
      // Start next to a boundary curve on a random side.
      const Curve& curve = *curves[static_cast<std::size_t>(u(rng) * curves.size()) % curves.size()];
      double a = std::min(curve.s_begin, curve.s_end), b = std::max(curve.s_begin, curve.s_end);
      if (!std::isfinite(b)) b = a + 3.0 / p.c_minus;
      a = std::max({a, curve.table.s_lo(), 1e-3});
      b = std::min(b, curve.table.s_hi());
      const double s0 = a + (b - a) * (0.02 + 0.96 * u(rng));
      const double w_curve = curve.table.curve_w(s0);
      const double offset = (u(rng) < 0.5 ? -1.0 : 1.0) * (1e-3 + 0.3 * u(rng)) * (1.0 + std::abs(w_curve));
      const Trajectory traj = simulate_ws(p, random_path(p, rng()), w_curve + offset, s0, 20.0);
      const ComparisonReport rep = check_comparison(traj, th);
      cells[i].episodes += rep.episodes.size();
      cells[i].tested += rep.tested;
      cells[i].violations += rep.violations;
    }
  });
  Result r{3, "comparison"};
  std::size_t episodes = 0, tested = 0, violations = 0;
  for (const Cell& c : cells) {
    episodes += c.episodes;
    tested += c.tested;
    violations += c.violations;
  }
  r.passed = tested >= 1000 && violations == 0;
  r.summary = std::to_string(kParams * kStarts) + " runs under random coefficient paths, " +
              std::to_string(tested) + " episodes with the sign hypothesis (of " + std::to_string(episodes) +
              "), " + std::to_string(violations) + " sign violations beyond 1e-7 relative";
  r.metrics = {{"episodes", static_cast<double>(episodes)},
               {"tested", static_cast<double>(tested)},
               {"violations", static_cast<double>(violations)}};
  return r;
}

Result invariance(const Options& opt) {
  const int runs[] = {67, 67, 66};
  InvarianceStats total;
  total.sub_min_s = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    auto rng = stream(opt.seed, 4, a);
    const Params p = admissible_params(rng, kAlignments[a]);
    const InvarianceStats st = invariance_suite(p, runs[a], 50.0, opt.seed * 31 + a);
    total.sub_runs += st.sub_runs;
    total.sub_exits += st.sub_exits;
    total.sub_nonpositive_s += st.sub_nonpositive_s;
    total.sub_min_s = std::min(total.sub_min_s, st.sub_min_s);
    total.sup_runs += st.sup_runs;
    total.sup_reached_cutoff += st.sup_reached_cutoff;
    total.sup_crossings += st.sup_crossings;
    total.sup_positive_w_star += st.sup_positive_w_star;
    total.sup_bound_failures += st.sup_bound_failures;
    total.episodes += st.episodes;
    total.comparison_violations += st.comparison_violations;
    for (const std::string& f : st.failures) {
      if (total.failures.size() < 3) total.failures.push_back(f);
    }
  }
  Result r{4, "invariance"};
  r.passed = total.passed() && total.sub_runs == 200 && total.sup_runs == 200;
  r.summary = std::to_string(total.sub_runs) + " subcritical runs (T=50): " + std::to_string(total.sub_exits) +
              " exits, min s " + sci(total.sub_min_s) + "; " + std::to_string(total.sup_runs) +
              " supercritical runs: " + std::to_string(total.sup_reached_cutoff) + " reached the cutoff, " +
              std::to_string(total.sup_positive_w_star) + " with w(t*) > 0, " +
              std::to_string(total.sup_bound_failures) + " stage-bound failures" +
              (total.failures.empty() ? "" : "; first: " + total.failures.front());
  r.metrics = {{"sub_runs", total.sub_runs},
               {"sub_exits", total.sub_exits},
               {"sub_min_s", total.sub_min_s},
               {"sup_runs", total.sup_runs},
               {"sup_reached_cutoff", total.sup_reached_cutoff},
               {"sup_positive_w_star", total.sup_positive_w_star},
               {"sup_bound_failures", total.sup_bound_failures}};
  return r;
}

Result super_auto(const Options& opt) {
  constexpr int kParams = 10000;
  struct Cell {
    int checks = 0, exceptions = 0, chains = 0;
  };
  std::vector<Cell> cells(kParams);
  parallel_for(kParams, [&](std::size_t i) {
    auto rng = stream(opt.seed, 5, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Params p = sample_params(rng, kAlignments[i % 3], 2.0 * u(rng), 2.0 * u(rng));
    const CornerChain sup = supercritical_corners(p);
    Cell& cell = cells[i];
    cell.chains += sup.step2.has_value();
    if (sup.step2) {
      ++cell.checks;
      if (!(sup.step2->s > 1.0 / p.c_plus)) ++cell.exceptions;
    }
    if (sup.step3) {
      ++cell.checks;
      if (!(sup.step3->w > p.nu_minus / p.c_plus)) ++cell.exceptions;
    }
    if (sup.w_star) {
      ++cell.checks;
      if (!(*sup.w_star > p.nu_minus / (2.0 * p.c_plus))) ++cell.exceptions;
    }
  });
  int checks = 0, exceptions = 0, chains = 0;
  for (const Cell& c : cells) {
    checks += c.checks;
    exceptions += c.exceptions;
    chains += c.chains;
  }
  Result r{5, "supercritical-conditions"};
  r.passed = exceptions == 0 && checks > 0;
  r.summary = std::to_string(kParams) + " parameter sets (" + std::to_string(chains) +
              " with s~2 defined, the rest scenario III or borderline), " + std::to_string(checks) +
              " checks of s~2 > 1/c+, w~3 > nu-/c+, w~* > nu-/(2c+), " + std::to_string(exceptions) + " exceptions";
  r.metrics = {{"params", kParams}, {"chains", chains}, {"checks", checks}, {"exceptions", exceptions}};
  return r;
}

Result reductions(const Options& opt) {
  constexpr int kDraws = 200;
  int a_compared = 0, a_fail = 0, b_compared = 0, b_fail = 0;
  double a_worst = 0.0, b_worst = 0.0;
  const auto record = [](double mine, double reduced, double scale, int& compared, int& fail, double& worst) {
    ++compared;
    const double err = std::abs(mine - reduced) / scale;
    worst = std::max(worst, err);
    if (err > 1e-10) ++fail;
  };

  // (a) constant background.
  for (int i = 0, found = 0; found < kDraws && i < 100 * kDraws; ++i) {
    auto rng = stream(opt.seed, 6, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double k = 0.5 + 1.5 * u(rng), c = 0.5 + u(rng), edge = 2.0 * std::sqrt(k * c);
    const double nm = edge * (0.1 + 0.85 * u(rng)), np = nm * (1.0 + 0.5 * u(rng));
    const Params p = validate(k, c, c, nm, np);
    const CornerSet cs = compute_corners(p);
    const Admissibility adm = admissibility(cs);
    if (!adm.ac2e) continue;
    ++found;
    const LocalConstants& z = cs.constants;
    const double z2z3 = *z.z2 * *z.z3;
    const double gain = np >= edge ? *z.eta1 : std::sqrt(k / c) * *z.z1;
    const double reduced2 = c * z2z3 / (1.0 + z2z3) * gain - (np - nm);
    const double scale2 = 1.0 + std::abs(adm.ac2e->lhs) + std::abs(adm.ac2e->rhs);
    record(adm.ac2e->margin(), (1.0 + z2z3) * reduced2, scale2, a_compared, a_fail, a_worst);
    if (adm.ac3e) {
      const double reduced3 = std::sqrt(k * c) * (*z.z1 * z2z3 * *z.z4 - 1.0) / ((1.0 + z2z3) * *z.z4) - (np - nm);
      const double factor = (1.0 + z2z3) * *z.z4 / (c * std::sqrt(k));
      const double scale3 = 1.0 + std::abs(adm.ac3e->lhs) + std::abs(adm.ac3e->rhs);
      record(adm.ac3e->margin(), factor * reduced3, scale3, a_compared, a_fail, a_worst);
    }
  }

  // (b) constant alignment.
  for (int i = 0, found = 0; found < kDraws && i < 100 * kDraws; ++i) {
    auto rng = stream(opt.seed, 60, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double k = 0.5 + 1.5 * u(rng), cm = 0.5 + u(rng), cp = cm * (1.0 + 0.3 * u(rng));
    const double nu = 2.0 * std::sqrt(k * cm) * (0.1 + 0.85 * u(rng));
    const Params p = validate(k, cm, cp, nu, nu);
    const CornerSet cs = compute_corners(p);
    const Admissibility adm = admissibility(cs);
    if (!adm.ac1e) continue;
    ++found;
    const LocalConstants& z = cs.constants;
    const double s_plus = (1.0 + *z.z1 * *z.z2) / cp;
    const double scale1 = 1.0 + std::abs(adm.ac1e->lhs) + std::abs(adm.ac1e->rhs);
    record(adm.ac1e->margin(), s_plus - 1.0 / cm, scale1, b_compared, b_fail, b_worst);
    if (adm.ac3_explicit) {
      const double gamma = *z.z3 * *z.z4;
      const double reduced = gamma * (s_plus * cm - 1.0) - 1.0;
      const double scale3 = 1.0 + std::abs(adm.ac3_explicit->lhs) + std::abs(adm.ac3_explicit->rhs);
      record(adm.ac3_explicit->margin(), reduced / cm, scale3, b_compared, b_fail, b_worst);
    }
  }

  // (c) both constant: no gap off the shared boundary.
  int c_indeterminate = 0, c_points = 0;
  for (const Params& p : {Params{1, 1, 1, 0.4, 0.4}, Params{1, 1, 1, 3, 3}, Params{2, 0.7, 0.7, 1.2, 1.2}}) {
    const Thresholds th(p, 1024);
    const double s_top = 3.0 / p.c_minus;
    for (int i = 1; i <= 200; ++i) {
      for (int j = 0; j < 200; ++j) {
        const double s = s_top * i / 200.0;
        const double w = -4.0 + 8.0 * j / 199.0 + p.nu_plus * s;
        ++c_points;
        if (th.classify_ws(w, s).verdict == Verdict::Indeterminate &&
            std::abs(th.supercritical().margin(w, s)) > 1e-12) {
          ++c_indeterminate;
        }
      }
    }
  }

  Result r{6, "reductions"};
  r.passed = a_fail == 0 && b_fail == 0 && c_indeterminate == 0 && a_compared > 0 && b_compared > 0;
  r.summary = "(a) c-=c+: " + std::to_string(a_compared) + " AC2e/AC3e comparisons, max rel " + sci(a_worst) +
              "; (b) nu-=nu+: " + std::to_string(b_compared) + " AC1e/AC3 comparisons, max rel " + sci(b_worst) +
              "; (c) both: " + std::to_string(c_indeterminate) + " indeterminate of " + std::to_string(c_points);
  r.metrics = {{"a_compared", a_compared}, {"a_failures", a_fail}, {"a_max_rel", a_worst},
               {"b_compared", b_compared}, {"b_failures", b_fail}, {"b_max_rel", b_worst},
               {"c_indeterminate", c_indeterminate}};
  return r;
}

Result pde(const Options&) {
  using namespace ctepa::pde;
  constexpr int n = 512;
  const double psi = 0.5, c = 1.0;
  std::vector<double> rho0(n), u_smooth(n), u_shock(n);
  for (int i = 0; i < n; ++i) {
    const double x = kTwoPi * i / n;
    rho0[i] = 1.0 + 0.2 * std::cos(x);
    u_smooth[i] = 0.3 * std::sin(x);
    u_shock[i] = -6.0 * std::sin(x);
  }
  Domain dom;
  dom.kernel = KernelSpec::constant(psi);
  dom.background = BackgroundSpec::constant(c);

  // Smooth run from pointwise subcritical data.
  const auto [model, s0] = init(rho0, u_smooth, dom);
  const Params p = model.params();
  const Thresholds th(p);
  int not_sub = 0;
  for (int i = 0; i < n; ++i) not_sub += th.classify_Grho(s0.G[i], s0.rho[i]).verdict != Verdict::Subcritical;
  RunControls ctl;
  ctl.T = 20.0;
  ctl.dt = 0.02;
  ctl.snapshot_times = {5.0, 10.0, 20.0};
  const Outcome smooth = run(model, s0, ctl);
  const bool smooth_ok = not_sub == 0 && smooth.kind == Outcome::Kind::Smooth &&
                         smooth.sup_rho <= 2.0 * smooth.sup_rho_first_half;

  // Characteristics against the scalar dynamics with nu = psi * mass.
  std::vector<double> worst(smooth.snapshots.size() * n, 0.0);
  parallel_for(worst.size(), [&](std::size_t idx) {
    const Snapshot& snap = smooth.snapshots[idx / n];
    const Eigen::Index i = static_cast<Eigen::Index>(idx % n);
    SimControls sc;
    sc.rtol = 1e-12;
    sc.atol = 1e-14;
    const Trajectory traj =
        simulate_ws(p, constant_path(p, c, psi * model.total_mass()), s0.G[i] / s0.rho[i], 1.0 / s0.rho[i], snap.t, sc);
    worst[idx] = std::max(std::abs(snap.G[i] / snap.rho[i] - traj.samples.back().w),
                          std::abs(1.0 / snap.rho[i] - traj.samples.back().s));
  });
  const double char_err = worst.empty() ? INFINITY : *std::max_element(worst.begin(), worst.end());

  // Blowup from data that is supercritical near one point.
  const auto [model2, s2] = init(rho0, u_shock, dom);
  int super_points = 0;
  for (int i = 0; i < n; ++i) super_points += th.classify_Grho(s2.G[i], s2.rho[i]).verdict == Verdict::Supercritical;
  RunControls ctl2;
  ctl2.T = 20.0;
  ctl2.dt = 0.02;
  const Outcome shock = run(model2, s2, ctl2);
  std::string label_verdict = "none";
  if (shock.label) {
    const Eigen::Index i = static_cast<Eigen::Index>(*shock.label);
    label_verdict = std::string(to_string(th.classify_Grho(s2.G[i], s2.rho[i]).verdict));
  }
  const bool shock_ok = super_points > 0 && shock.kind == Outcome::Kind::Blowup && label_verdict == "supercritical";

  Result r{7, "pde"};
  r.passed = smooth_ok && shock_ok && char_err < 1e-5;
  r.summary = "N=512: subcritical data " + std::string(to_string(smooth.kind)) + " to T=" +
              format_double(smooth.t_end) + " (sup rho " + format_double(std::round(smooth.sup_rho * 1e6) / 1e6) +
              ", first-half max " + format_double(std::round(smooth.sup_rho_first_half * 1e6) / 1e6) +
              "); data supercritical at " + std::to_string(super_points) + " points " +
              std::string(to_string(shock.kind)) + " at t* ~ " +
              format_double(std::round(shock.t_star.value_or(NAN) * 1e6) / 1e6) + " (" + shock.reason +
              "), blowup particle's datum " + label_verdict + "; characteristic (w,s) error " + sci(char_err);
  r.metrics = {{"smooth_sup_rho", smooth.sup_rho},
               {"smooth_first_half_rho", smooth.sup_rho_first_half},
               {"not_subcritical_points", not_sub},
               {"supercritical_points", super_points},
               {"t_star", shock.t_star.value_or(NAN)},
               {"characteristic_error", char_err}};
  return r;
}

Result vacuum(const Options& opt) {
  constexpr int kPerCase = 50;
  struct Cell {
    bool ok = true;
    std::string what;
  };
  std::vector<Cell> cells(3 * kPerCase);
  SimControls ctl;
  ctl.h_max = 1.0;
  parallel_for(cells.size(), [&](std::size_t idx) {
    const int kase = static_cast<int>(idx / kPerCase);
    auto rng = stream(opt.seed, 8, idx);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Params p;
    double G0 = 0.0, T = 0.0;
    VacuumVerdict expected;
    if (kase == 0) {
      p = sample_params(rng, Alignment::Weak);
      G0 = -5.0 + 10.0 * u(rng);
      T = 1e5;
      expected = VacuumVerdict::Blowup;
    } else if (kase == 1) {
      p = sample_params(rng, u(rng) < 0.5 ? Alignment::Median : Alignment::Strong);
      G0 = g_sharp(p) - 0.05 - 3.0 * u(rng);
      T = 1e5;
      expected = VacuumVerdict::Blowup;
    } else {
      p = sample_params(rng, Alignment::Strong);
      G0 = g_flat(p) + 3.0 * u(rng);
      T = 200.0;
      expected = VacuumVerdict::Bounded;
    }
    const VacuumOutcome out = simulate_vacuum_G(p, random_path(p, rng()), G0, T, 1e8, ctl);
    if (out.verdict != expected || !out.consistent) {
      cells[idx].ok = false;
      cells[idx].what = "case " + std::to_string(kase + 1) + " G0=" + format_double(G0);
    }
  });
  int bad[3] = {0, 0, 0};
  std::string first;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].ok) continue;
    ++bad[i / kPerCase];
    if (first.empty()) first = cells[i].what;
  }
  Result r{8, "vacuum"};
  r.passed = bad[0] + bad[1] + bad[2] == 0;
  r.summary = "weak (any G0) -> blowup: " + std::to_string(bad[0]) + "/50 misclassified; G0 < G_sharp -> blowup: " +
              std::to_string(bad[1]) + "/50; strong with G0 >= G_flat -> bounded below max(G0, G+): " +
              std::to_string(bad[2]) + "/50" + (first.empty() ? "" : "; first: " + first);
  r.metrics = {{"weak_misclassified", bad[0]}, {"sharp_misclassified", bad[1]}, {"flat_misclassified", bad[2]}};
  return r;
}

Result zero_alignment(const Options&) {
  const double k = 1.0, c = 1.0, nu = 1e-7;
  const Thresholds th(Params{k, c, c, nu, nu}, 2048);
  int classical = 0, printed = 0, compared = 0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const double rho = 0.05 + 3.0 * i / 99.0;
      const double G = -3.0 + 6.0 * j / 99.0;
      const double lin = 2.0 * rho - c;
      if (std::abs(k * lin - G * G) < 1e-3) continue;
      const bool sub = th.classify_Grho(G, rho).verdict == Verdict::Subcritical;
      ++compared;
      classical += sub != (k * lin - G * G > 0.0);
      printed += sub != (lin > 0.0 && G * G < std::sqrt(k * lin));
    }
  }
  Result r{9, "zero-alignment"};
  r.passed = (classical == 0) != (printed == 0);
  const std::string match = classical == 0 && printed != 0   ? "classical G^2 < k(2 rho - c)"
                            : printed == 0 && classical != 0 ? "square-root form G^2 < sqrt(k(2 rho - c))"
                                                             : "neither uniquely";
  r.summary = "nu = 1e-7, c- = c+ = 1: region matches " + match + " (" + std::to_string(compared) +
              " grid points; classical mismatches " + std::to_string(classical) + ", square-root mismatches " +
              std::to_string(printed) + ")";
  r.metrics = {{"compared", compared}, {"classical_mismatches", classical}, {"printed_mismatches", printed}};
  return r;
}

const std::vector<Suite>& suites() {
  static const std::vector<Suite> all{{"corners", corners},       {"level-sets", level_sets},
                                      {"comparison", comparison}, {"invariance", invariance},
                                      {"supercritical-conditions", super_auto},
                                      {"reductions", reductions}, {"pde", pde},
                                      {"vacuum", vacuum},         {"zero-alignment", zero_alignment}};
  return all;
}

std::vector<Result> run(const std::string& which, const Options& opt,
                        const std::function<void(const Result&, double)>& on_result) {
  std::vector<Result> out;
  bool known = which == "all";
  for (const Suite& s : suites()) {
    if (which != "all" && which != s.name) continue;
    known = true;
    const auto t0 = std::chrono::steady_clock::now();
    Result r = s.run(opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r, secs);
    out.push_back(std::move(r));
  }
  if (!known) {
    std::string names = "all";
    for (const Suite& s : suites()) names += ", " + s.name;
    throw ConfigError("unknown suite '" + which + "' (expected one of " + names + ")");
  }
  return out;
}

std::string format(const Result& r) {
  return std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.name + ": " + r.summary;
}

}  // namespace ctepa::verify
