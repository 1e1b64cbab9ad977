#include "ctepa/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "ctepa/detail/format.hpp"
#include "ctepa/dynamics.hpp"
#include "ctepa/errors.hpp"
#include "ctepa/io.hpp"
#include "ctepa/oracle.hpp"
#include "ctepa/parallel.hpp"
#include "ctepa/pde.hpp"
#include "ctepa/regions.hpp"
#include "ctepa/verify.hpp"

namespace ctepa::cli {

namespace {

using detail::format_double;
using io::Json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

void write_json(const std::filesystem::path& path, const Json& j) { open_out(path) << j.dump(2) << '\n'; }

// Loads params and insists the subcritical construction closes.
Params admissible_params(const Json& j) {
  const Params p = io::params_from_json(j);
  const Admissibility adm = admissibility(compute_corners(p));
  if (!adm.closes()) throw InadmissibleError(adm.failure());
  return p;
}

Json region_json(const Region& r) {
  Json curves = Json::array();
  for (const Curve& c : r.curves()) {
    curves.push_back(Json{{"id", c.id}, {"s_begin", c.s_begin}, {"s_end", c.s_end}});
  }
  return Json{{"bounded", r.bounded()},
              {"cap", std::isfinite(r.cap()) ? Json(r.cap()) : Json(nullptr)},
              {"left_break", r.left_break()},
              {"right_break", std::isfinite(r.right_break()) ? Json(r.right_break()) : Json(nullptr)},
              {"curves", curves}};
}

// ---------------------------------------------------------------------------

int cmd_regions(const std::string& params_path, const std::string& out_dir, int resolution, std::ostream& out) {
  const Json config = io::read_json_file(params_path);
  const Params p = admissible_params(config);
  const std::string hash = io::config_hash(config);
  const Thresholds th(p);
  Json meta = io::meta(hash);
  meta["params"] = io::to_json(p);
  meta["regime"] = io::to_json(th.corners().regime);
  meta["corners"] = io::to_json(th.corners());
  meta["admissibility"] = io::to_json(th.admissibility());
  meta["subcritical"] = region_json(*th.subcritical());
  meta["supercritical"] = region_json(th.supercritical());
  meta["resolution"] = resolution;
  const std::filesystem::path dir(out_dir);
  write_json(dir / "region_meta.json", meta);

  std::vector<PolylinePoint> pts = th.subcritical()->polylines(resolution);
  for (PolylinePoint& q : th.supercritical().polylines(resolution)) pts.push_back(std::move(q));
  std::ofstream csv = open_out(dir / "curves.csv");
  csv << io::csv_header(hash) << '\n';
  write_curves_csv(csv, pts);
  out << "wrote " << (dir / "region_meta.json").string() << " and " << (dir / "curves.csv").string() << " ("
      << pts.size() << " points)\n";
  return kOk;
}

int cmd_classify(const std::string& params_path, double G, double rho, std::ostream& out) {
  const Json config = io::read_json_file(params_path);
  const Params p = admissible_params(config);
  if (!(rho > 0.0) || !std::isfinite(G) || !std::isfinite(rho)) throw DomainError("classify: need finite G and rho > 0");
  const Thresholds th(p);
  const Classification c = th.classify_Grho(G, rho);
  out << to_string(c.verdict) << ": " << c.decided_by << '\n';
  Json j = io::meta(io::config_hash(config));
  j["G"] = G;
  j["rho"] = rho;
  j["w"] = G / rho;
  j["s"] = 1.0 / rho;
  j["verdict"] = std::string(to_string(c.verdict));
  j["decided_by"] = c.decided_by;
  j["regime"] = io::to_json(th.corners().regime);
  out << j.dump() << '\n';
  return kOk;
}

// Lyapunov value of the first area holding the point whose kind agrees with the verdict.
std::optional<double> active_L(const Thresholds& th, Verdict v, double w, double s) {
  if (v == Verdict::Indeterminate) return std::nullopt;
  const bool sub = v == Verdict::Subcritical;
  const Region& region = sub ? *th.subcritical() : th.supercritical();
  const Area first = sub ? Area::R1 : Area::Rt1;
  for (int i = 0; i < 4; ++i) {
    const Area a = static_cast<Area>(static_cast<int>(first) + i);
    if (!in_area(region, a, w, s)) continue;
    if (const auto L = area_L(th, a, w, s)) return L;
  }
  return std::nullopt;
}

int cmd_simulate(const std::string& params_path, double w0, double s0, double T, const std::string& mode,
                 const std::string& out_path, std::ostream& out) {
  const Json config = io::read_json_file(params_path);
  const Params p = admissible_params(config);
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("simulate: T must be positive and finite");
  const Thresholds th(p);
  const Trajectory traj = simulate_ws(p, path_from_mode(p, mode), w0, s0, T);
  Json run_config = config;
  run_config["w0"] = w0;
  run_config["s0"] = s0;
  run_config["T"] = T;
  run_config["coeff_mode"] = mode;
  std::ofstream csv = open_out(out_path);
  csv << io::csv_header(io::config_hash(run_config)) << '\n' << "t,w,s,region,L_active\n";
  for (const Sample& x : traj.samples) {
    std::string region = "none";
    std::string L = "nan";
    if (x.s > 0.0 && std::isfinite(x.w)) {
      const Verdict v = th.classify_ws(x.w, x.s).verdict;
      region = std::string(to_string(v));
      if (const auto l = active_L(th, v, x.w, x.s)) L = format_double(*l);
    }
    csv << format_double(x.t) << ',' << format_double(x.w) << ',' << format_double(x.s) << ',' << region << ','
        << L << '\n';
  }
  out << "start " << to_string(th.classify_ws(w0, s0).verdict) << ", " << traj.samples.size() << " samples";
  if (traj.blowup) {
    out << ", blowup at t* = " << format_double(traj.blowup->t_star) << " with w(t*) = "
        << format_double(traj.blowup->w_star);
  } else {
    out << ", smooth to T = " << format_double(traj.samples.back().t);
  }
  out << "; wrote " << out_path << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// pde-run

std::string get_string(const Json& j, const char* key, const std::string& where, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(where + ": '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

int get_int(const Json& j, const char* key, const std::string& where, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError(where + ": '" + key + "' must be an integer");
  return j.at(key).get<int>();
}

pde::KernelSpec parse_kernel(const Json& j) {
  const std::string family = get_string(j, "family", "kernel", "constant");
  if (family == "constant") {
    io::require_keys(j, {"family", "psi"}, "kernel");
    return pde::KernelSpec::constant(io::get_number(j, "psi", "kernel"));
  }
  if (family == "cosine_bump") {
    io::require_keys(j, {"family", "mean", "amplitude"}, "kernel");
    return pde::KernelSpec::cosine_bump(io::get_number(j, "mean", "kernel"), io::get_number(j, "amplitude", "kernel"));
  }
  throw ConfigError("kernel: family must be constant or cosine_bump");
}

pde::BackgroundSpec parse_background(const Json& j) {
  const std::string family = get_string(j, "family", "background", "constant");
  if (family == "constant") {
    io::require_keys(j, {"family", "level"}, "background");
    return pde::BackgroundSpec::constant(io::get_number(j, "level", "background"));
  }
  if (family == "cosine_wave") {
    io::require_keys(j, {"family", "level", "amplitude", "speed"}, "background");
    return pde::BackgroundSpec::cosine_wave(io::get_number(j, "level", "background"),
                                            io::get_number(j, "amplitude", "background"),
                                            io::get_number(j, "speed", "background", 0.0));
  }
  throw ConfigError("background: family must be constant or cosine_wave");
}

// mean + amplitude * cos or sin of (mode * 2 pi i / n), the profile at the particles' reference positions.
std::vector<double> parse_profile(const Json& j, const std::string& where, int n) {
  io::require_keys(j, {"shape", "mean", "amplitude", "mode"}, where);
  const std::string shape = get_string(j, "shape", where, "constant");
  const double mean = io::get_number(j, "mean", where, 0.0);
  const double amp = io::get_number(j, "amplitude", where, 0.0);
  const int mode = get_int(j, "mode", where, 1);
  if (shape != "constant" && shape != "cosine" && shape != "sine") {
    throw ConfigError(where + ": shape must be constant, cosine or sine");
  }
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    const double arg = pde::kTwoPi * mode * i / n;
    v[i] = mean + (shape == "cosine" ? amp * std::cos(arg) : shape == "sine" ? amp * std::sin(arg) : 0.0);
  }
  return v;
}

void write_state_rows(std::ostream& os, double t, const Eigen::ArrayXd& x, const Eigen::ArrayXd& u,
                      const Eigen::ArrayXd& rho, const Eigen::ArrayXd& G) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    os << format_double(t) << ',' << i << ',' << format_double(x[i]) << ',' << format_double(u[i]) << ','
       << format_double(rho[i]) << ',' << format_double(G[i]) << '\n';
  }
}

int cmd_pde_run(const std::string& config_path, const std::string& out_dir, std::ostream& out) {
  const Json config = io::read_json_file(config_path);
  io::require_keys(config,
                   {"k", "length", "N", "M", "kernel", "background", "rho0", "u0", "T", "dt", "snapshots", "field",
                    "alignment", "rho_blow", "g_blow"},
                   "pde config");
  pde::Domain dom;
  dom.k = io::get_number(config, "k", "pde config", 1.0);
  dom.length = io::get_number(config, "length", "pde config", pde::kTwoPi);
  dom.grid = get_int(config, "M", "pde config", 0);
  const int n = get_int(config, "N", "pde config", 512);
  if (n < 8) throw ConfigError("pde config: N must be at least 8");
  if (config.contains("kernel")) dom.kernel = parse_kernel(config.at("kernel"));
  if (config.contains("background")) dom.background = parse_background(config.at("background"));
  if (!config.contains("rho0") || !config.contains("u0")) throw ConfigError("pde config: rho0 and u0 are required");
  const std::vector<double> rho0 = parse_profile(config.at("rho0"), "rho0", n);
  const std::vector<double> u0 = parse_profile(config.at("u0"), "u0", n);

  pde::RunControls ctl;
  ctl.T = io::get_number(config, "T", "pde config", 1.0);
  ctl.dt = io::get_number(config, "dt", "pde config", 1e-2);
  ctl.rho_blow = io::get_number(config, "rho_blow", "pde config", ctl.rho_blow);
  ctl.g_blow = io::get_number(config, "g_blow", "pde config", ctl.g_blow);
  if (!(ctl.T > 0.0) || !(ctl.dt > 0.0)) throw ConfigError("pde config: T and dt must be positive");
  if (config.contains("snapshots")) {
    const Json& s = config.at("snapshots");
    if (!s.is_array()) throw ConfigError("pde config: snapshots must be an array of times");
    for (const Json& t : s) {
      if (!t.is_number()) throw ConfigError("pde config: snapshots must be an array of times");
      ctl.snapshot_times.push_back(t.get<double>());
    }
  }
  const std::string field = get_string(config, "field", "pde config", "sheet");
  const std::string align = get_string(config, "alignment", "pde config", "direct");
  if (field != "sheet" && field != "grid") throw ConfigError("pde config: field must be sheet or grid");
  if (align != "direct" && align != "grid") throw ConfigError("pde config: alignment must be direct or grid");
  ctl.schemes.field = field == "grid" ? pde::FieldMode::Grid : pde::FieldMode::Sheet;
  ctl.schemes.alignment = align == "grid" ? pde::AlignmentSum::Grid : pde::AlignmentSum::Direct;

  const auto [model, s0] = pde::init(rho0, u0, dom);
  const Params p = model.params();
  const Thresholds th(p);
  int counts[3] = {0, 0, 0};
  for (Eigen::Index i = 0; i < s0.x.size(); ++i) ++counts[static_cast<int>(th.classify_Grho(s0.G[i], s0.rho[i]).verdict)];

  const pde::Outcome o = pde::run(model, s0, ctl);
  const std::string hash = io::config_hash(config);
  const std::filesystem::path dir(out_dir);

  {
    std::ofstream csv = open_out(dir / "snapshots.csv");
    csv << io::csv_header(hash) << '\n' << "t,i,x,u,rho,G\n";
    write_state_rows(csv, s0.t, s0.x, s0.u, s0.rho, s0.G);
    for (const pde::Snapshot& s : o.snapshots) write_state_rows(csv, s.t, s.x, s.u, s.rho, s.G);
  }
  {
    std::ofstream csv = open_out(dir / "history.csv");
    csv << io::csv_header(hash) << '\n' << "t,max_rho,min_G,momentum\n";
    for (const pde::MonitorPoint& m : o.history) {
      csv << format_double(m.t) << ',' << format_double(m.max_rho) << ',' << format_double(m.min_G) << ','
          << format_double(m.momentum) << '\n';
    }
  }
  Json j = io::meta(hash);
  j["config"] = config;
  j["params"] = io::to_json(p);
  j["regime"] = io::to_json(classify_regime(p));
  j["initial_verdicts"] = Json{{"subcritical", counts[0]}, {"supercritical", counts[1]}, {"indeterminate", counts[2]}};
  j["kind"] = std::string(pde::to_string(o.kind));
  j["t_end"] = o.t_end;
  j["steps"] = o.steps;
  if (o.kind == pde::Outcome::Kind::Blowup) {
    j["t_star"] = o.t_star ? Json(*o.t_star) : Json(nullptr);
    j["x_star"] = o.x_star ? Json(*o.x_star) : Json(nullptr);
    j["reason"] = o.reason;
    if (o.label) {
      const auto i = static_cast<Eigen::Index>(*o.label);
      j["label"] = *o.label;
      j["label_initial"] = Json{{"G", s0.G[i]}, {"rho", s0.rho[i]}};
      j["label_verdict"] = std::string(to_string(th.classify_Grho(s0.G[i], s0.rho[i]).verdict));
    }
  }
  j["sup_rho"] = o.sup_rho;
  j["sup_rho_first_half"] = o.sup_rho_first_half;
  j["max_momentum_drift"] = o.max_momentum_drift;
  j["max_poisson_residual"] = o.max_poisson_residual;
  j["background_factor"] = Json{{"min", o.factor_min}, {"max", o.factor_max}};
  write_json(dir / "outcome.json", j);

  out << pde::to_string(o.kind) << " at t = " << format_double(o.t_end);
  if (o.t_star) out << " (t* ~ " << format_double(*o.t_star) << ", " << o.reason << ")";
  out << "; wrote " << (dir / "outcome.json").string() << ", snapshots.csv, history.csv\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  verify::Options opt;
  opt.seed = seed;
  opt.oracle = [](const Params& p) { return oracle::corners(p, 1e-3); };
  const std::vector<verify::Result> results =
      verify::run(suite, opt, [&](const verify::Result& r, double) { out << verify::format(r) << '\n' << std::flush; });
  int failed = 0;
  Json report = io::meta(io::config_hash(Json{{"suite", suite}, {"seed", seed}}));
  report["seed"] = seed;
  Json rows = Json::array();
  for (const verify::Result& r : results) {
    failed += !r.passed;
    Json metrics = Json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = v;
    rows.push_back(Json{{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"summary", r.summary},
                        {"metrics", metrics}});
  }
  report["results"] = rows;
  if (!out_path.empty()) write_json(out_path, report);
  out << results.size() - failed << " of " << results.size() << " suites passed\n";
  return failed == 0 ? kOk : kInternal;
}

// Each parameter is a number, an array of numbers, or {"from", "to", "count"}.
std::vector<double> axis(const Json& spec, const std::string& name) {
  if (spec.is_number()) return {spec.get<double>()};
  std::vector<double> v;
  if (spec.is_array()) {
    for (const Json& x : spec) {
      if (!x.is_number()) throw ConfigError("sweep: " + name + " entries must be numbers");
      v.push_back(x.get<double>());
    }
  } else if (spec.is_object()) {
    io::require_keys(spec, {"from", "to", "count"}, "sweep " + name);
    const double a = io::get_number(spec, "from", name), b = io::get_number(spec, "to", name);
    const int n = get_int(spec, "count", name, 0);
    if (n < 1) throw ConfigError("sweep: " + name + " count must be at least 1");
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  } else {
    throw ConfigError("sweep: " + name + " must be a number, an array or {from, to, count}");
  }
  if (v.empty()) throw ConfigError("sweep: " + name + " is empty");
  return v;
}

int cmd_sweep(const std::string& grid_path, const std::string& out_path, std::ostream& out) {
  const Json config = io::read_json_file(grid_path);
  io::require_keys(config, {"k", "c_minus", "c_plus", "nu_minus", "nu_plus"}, "sweep");
  std::vector<std::vector<double>> axes;
  for (const char* key : {"k", "c_minus", "c_plus", "nu_minus", "nu_plus"}) {
    if (!config.contains(key)) throw ConfigError(std::string("sweep: missing key '") + key + "'");
    axes.push_back(axis(config.at(key), key));
  }
  std::size_t cells = 1;
  for (const auto& a : axes) cells *= a.size();
  if (cells > 10'000'000) throw ConfigError("sweep: grid has more than 1e7 cells");

  std::vector<std::string> rows(cells);
  std::vector<char> chain_ok(cells, 1);
  parallel_for(cells, [&](std::size_t idx) {
    double v[5];
    std::size_t rest = idx;
    for (int d = 4; d >= 0; --d) {
      v[d] = axes[d][rest % axes[d].size()];
      rest /= axes[d].size();
    }
    std::ostringstream row;
    for (double x : v) row << format_double(x) << ',';
    Params p;
    try {
      p = validate(v[0], v[1], v[2], v[3], v[4]);
    } catch (const ConfigError&) {
      row << "invalid,,,,,,,,,,,,,,,,,";
      rows[idx] = row.str();
      return;
    }
    const CornerSet cs = compute_corners(p);
    const Admissibility adm = admissibility(cs);
    const bool chain = (!adm.ac3 || adm.ac2) && (!adm.ac2 || adm.ac1);
    chain_ok[idx] = chain;
    const auto num = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
    const auto s_of = [](const std::optional<Corner>& c) { return c ? std::optional(c->s) : std::nullopt; };
    const auto w_of = [](const std::optional<Corner>& c) { return c ? std::optional(c->w) : std::nullopt; };
    row << "ok," << to_string(cs.regime.label) << ',' << to_string(cs.regime.sub) << ',' << to_string(cs.regime.sup)
        << ',' << adm.ac1 << ',' << adm.ac2 << ',' << adm.ac3 << ',' << adm.closes() << ',' << chain << ','
        << format_double(cs.sub.step1.w) << ',' << num(s_of(cs.sub.step2)) << ',' << num(w_of(cs.sub.step3)) << ','
        << num(s_of(cs.sub.step4)) << ',' << num(cs.sub.w_star) << ',' << format_double(cs.sup.step1.w) << ','
        << num(s_of(cs.sup.step2)) << ',' << num(w_of(cs.sup.step3)) << ',' << num(cs.sup.w_star);
    rows[idx] = row.str();
  });

  std::ofstream csv = open_out(out_path);
  csv << io::csv_header(io::config_hash(config)) << '\n'
      << "k,c_minus,c_plus,nu_minus,nu_plus,status,alignment,sub_scenario,sup_scenario,ac1,ac2,ac3,closes,chain_ok,"
         "w1,s2,w3,s4,w_star,wt1,st2,wt3,wt_star\n";
  for (const std::string& r : rows) csv << r << '\n';
  std::size_t broken = 0;
  for (char c : chain_ok) broken += !c;
  out << cells << " cells, " << broken << " violations of ac3 => ac2 => ac1; wrote " << out_path << '\n';
  return broken == 0 ? kOk : kInternal;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Critical thresholds for Euler-Poisson-alignment systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kVersion);

  std::string params_path, out_path, config_path, grid_path, suite = "all", mode = "const-minmax", verify_out;
  double G = 0.0, rho = 0.0, w0 = 0.0, s0 = 0.0, T = 0.0;
  int resolution = 512;
  std::uint64_t seed = 7;

  CLI::App* regions = app.add_subcommand("regions", "Write both threshold regions");
  regions->add_option("--params", params_path, "Params JSON")->required();
  regions->add_option("--out", out_path, "Output directory")->required();
  regions->add_option("--resolution", resolution, "Points per curve")->check(CLI::Range(2, 1'000'000));

  CLI::App* classify = app.add_subcommand("classify", "Classify one initial datum");
  classify->add_option("--params", params_path, "Params JSON")->required();
  classify->add_option("--G", G, "G = u_x + psi * rho")->required();
  classify->add_option("--rho", rho, "Density")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "Integrate the characteristic system");
  simulate->add_option("--params", params_path, "Params JSON")->required();
  simulate->add_option("--w0", w0, "Initial w = G / rho")->required();
  simulate->add_option("--s0", s0, "Initial s = 1 / rho")->required();
  simulate->add_option("--T", T, "Final time")->required();
  simulate->add_option("--coeff-mode", mode, "const-minmax, sine or random:<seed>");
  simulate->add_option("--out", out_path, "Trajectory CSV")->required();

  CLI::App* pde_run = app.add_subcommand("pde-run", "Run the particle solver");
  pde_run->add_option("--config", config_path, "Run JSON")->required();
  pde_run->add_option("--out", out_path, "Output directory")->required();

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the property suites");
  verify_cmd->add_option("--suite", suite, "all or a suite name");
  verify_cmd->add_option("--seed", seed, "Random seed");
  verify_cmd->add_option("--out", verify_out, "Optional JSON report");

  CLI::App* sweep = app.add_subcommand("sweep", "Tabulate a parameter grid");
  sweep->add_option("--grid", grid_path, "Grid JSON")->required();
  sweep->add_option("--out", out_path, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*regions) return cmd_regions(params_path, out_path, resolution, out);
    if (*classify) return cmd_classify(params_path, G, rho, out);
    if (*simulate) return cmd_simulate(params_path, w0, s0, T, mode, out_path, out);
    if (*pde_run) return cmd_pde_run(config_path, out_path, out);
    if (*verify_cmd) return cmd_verify(suite, seed, verify_out, out);
    if (*sweep) return cmd_sweep(grid_path, out_path, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InadmissibleError& e) {
    err << e.what() << '\n';
    return kInadmissible;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kConfigError;
}

}  // namespace ctepa::cli
