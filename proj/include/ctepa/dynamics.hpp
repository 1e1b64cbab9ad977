#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctepa/regions.hpp"

namespace ctepa {

struct Coefficients {
  double c = 0.0;
  double nu = 0.0;
};

// Time-dependent c(t), nu(t) with declared bounds taken from Params.  Every
// evaluation is checked against those bounds.
class CoefficientPath {
 public:
  using Function = std::function<Coefficients(double)>;

  CoefficientPath(Params bounds, Function fn, std::string name, std::vector<double> breakpoints = {});

  Coefficients operator()(double t) const;
  const Params& bounds() const { return bounds_; }
  const std::string& name() const { return name_; }
  // Switching times; the integrator never steps across one.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

 private:
  Params bounds_;
  Function fn_;
  std::string name_;
  std::vector<double> breakpoints_;
};

enum class Extreme { Minus, Plus };

CoefficientPath constant_path(const Params& p, double c, double nu);
CoefficientPath extreme_path(const Params& p, Extreme c, Extreme nu);
CoefficientPath sine_path(const Params& p, double omega_c = 1.0, double omega_nu = 1.7, double phase = 0.0);
// Piecewise constant values redrawn after exponential dwell times; half of
// the draws snap to a bound.  Constant after `horizon`.
CoefficientPath random_switching_path(const Params& p, std::uint64_t seed, double mean_dwell = 1.0,
                                      double horizon = 1e3);
// Draws one of the generators above at random (used by Monte-Carlo suites).
CoefficientPath random_path(const Params& p, std::uint64_t seed);
// "const-minmax", "sine" or "random:<seed>".
CoefficientPath path_from_mode(const Params& p, const std::string& mode);

struct SimControls {
  double rtol = 1e-10;
  double atol = 1e-12;
  double s_eps = 1e-8;
  double h_init = 1e-3;
  double h_max = 0.05;
  double event_tol = 1e-12;
  std::size_t max_steps = 5'000'000;
};

struct Sample {
  double t = 0.0, w = 0.0, s = 0.0;
};

struct Event {
  double t = 0.0, w = 0.0, s = 0.0;
  std::string name;
  int direction = 0;  // +1 when the event function increases through zero
};

struct BlowupEvent {
  double t_cutoff = 0.0;
  double t_star = 0.0;
  double t_star_error = 0.0;
  double w_star = 0.0;
};

struct Trajectory {
  Params params;
  std::vector<Sample> samples;
  std::vector<Event> events;
  std::optional<BlowupEvent> blowup;
  std::size_t accepted = 0, rejected = 0;
};

Trajectory simulate_ws(const Params& p, const CoefficientPath& coeffs, double w0, double s0, double T,
                       const SimControls& controls = {});

// The localized areas in which each comparison principle applies, closed.
enum class Area { R1, R2, R3, R4, Rt1, Rt2, Rt3, Rt4 };
std::string_view to_string(Area a);
// Closed area widened by tol relative to the point's magnitude.
bool in_area(const Region& region, Area a, double w, double s, double tol = 1e-10);

struct Episode {
  Area area;
  std::size_t first = 0, last = 0;  // sample indices, inclusive
  double t_entry = 0.0, t_exit = 0.0;
  double L_entry = 0.0, L_min = 0.0, L_max = 0.0;
  bool hypothesis = false;  // entry satisfied the sign condition
  bool violated = false;    // hypothesis held and the sign was lost
};

struct ComparisonReport {
  std::vector<Episode> episodes;
  std::size_t tested = 0;  // episodes whose hypothesis held
  std::size_t violations = 0;
};

ComparisonReport check_comparison(const Trajectory& traj, const Thresholds& th);

// Lyapunov value of the area's curve at (w, s), if (w, s) is in the table's domain.
std::optional<double> area_L(const Thresholds& th, Area a, double w, double s);

// Stages of the passage to blowup.  A1Left is the part of A1 on the left of
// the tilde boundary, where s decreases; it behaves like an intermediate stage.
enum class Stage { A1, A1Left, A2, A3, A4 };
std::string_view to_string(Stage s);

struct StageRecord {
  Stage stage;
  double t_entry = 0.0, t_exit = 0.0;
  double w_entry = 0.0, s_entry = 0.0;
  double bound = 0.0;  // residence time bound; infinite when none applies
  bool within_bound = true;
  // A1 only: smallest s' seen and whether the case bounds held there.
  double min_ds = 0.0;
  bool case_bounds = true;
};

struct BlowupCertificate {
  std::vector<StageRecord> stages;
  double s_star = 0.0, s_star_star = 0.0, v_w = 0.0;
  bool order_ok = true;
  bool bounds_ok = true;
  bool w_star_nonpositive = true;
  double total_time = 0.0;
  double total_bound = 0.0;
  bool ok() const { return order_ok && bounds_ok && w_star_nonpositive; }
};

// Throws DomainError("not blown up") when the trajectory has no cutoff event.
BlowupCertificate certify_blowup(const Trajectory& traj, const Thresholds& th);

struct InvarianceStats {
  int sub_runs = 0, sub_exits = 0, sub_nonpositive_s = 0;
  double sub_min_s = 0.0;
  int sup_runs = 0, sup_reached_cutoff = 0, sup_crossings = 0, sup_positive_w_star = 0, sup_bound_failures = 0;
  std::size_t episodes = 0, comparison_violations = 0;
  std::vector<std::string> failures;  // first few descriptions
  bool passed() const {
    return sub_exits == 0 && sub_nonpositive_s == 0 && sup_reached_cutoff == sup_runs && sup_crossings == 0 &&
           sup_positive_w_star == 0 && sup_bound_failures == 0 && comparison_violations == 0;
  }
};

// n_runs subcritical starts (skipped when the subcritical region is
// unavailable) and n_runs supercritical starts, each with its own random
// coefficient path; supercritical runs continue until the cutoff or sup_T.
InvarianceStats invariance_suite(const Params& p, int n_runs, double T, std::uint64_t seed, double sup_T = 1e4,
                                 const SimControls& controls = {});

enum class VacuumVerdict { Blowup, Bounded };

struct VacuumOutcome {
  VacuumVerdict verdict = VacuumVerdict::Bounded;
  std::optional<double> t_star;
  double sup_G = 0.0, inf_G = 0.0;
  // Verdict required by the proposition for this G0, when one applies.
  std::optional<VacuumVerdict> predicted;
  std::optional<double> predicted_upper_bound;
  bool consistent = true;
};

// G' = -G (G - nu) - k c along a vacuum characteristic.
VacuumOutcome simulate_vacuum_G(const Params& p, const CoefficientPath& coeffs, double G0, double T,
                                double g_blow = 1e8, const SimControls& controls = {});

}  // namespace ctepa
