#pragma once

#include <optional>
#include <string>

#include "ctepa/core.hpp"
#include "ctepa/local_trajectory.hpp"

namespace ctepa {

LocalTrajectory<double> local_trajectory(double c, double nu, double k, double w0, double s0, double t0 = 0.0);

// Gain of a quarter turn: starting where s' = 0 and running backward until
// w' = 0, the offset from equilibrium is scaled by this factor.  It is the
// exponential of a positive quantity on every branch.
double quarter_gain(double c, double nu, double k);
// Signed (negative) duration of that quarter turn.
double quarter_time(double c, double nu, double k);
// Gain and (negative) duration of the half turn from w' = 0 back to s' = 0.
// Only the oscillatory branch turns; the others never do.
std::optional<double> half_turn_gain(double c, double nu, double k);
std::optional<double> half_turn_time(double c, double nu, double k);

struct Corner {
  double t = 0.0;
  double w = 0.0;
  double s = 0.0;
};

// Exit points of a four-piece boundary construction.  The chain stops at the
// first step that is undefined; `stop_reason` says why and `stop_is_admissibility`
// separates admissibility failures from scenario structure.
struct CornerChain {
  Corner step1;
  std::optional<Corner> step2, step3, step4;
  std::optional<double> t_star, w_star;
  std::string stop_reason;
  bool stop_is_admissibility = false;

  // Throws DomainError (structural) or InadmissibleError naming the reason.
  const Corner& at(int step) const;
  double star_w() const;
  double star_t() const;
};

struct LocalConstants {
  std::optional<double> z1, z2, z3, z4, eta1, eta3;
};

struct CornerSet {
  Params params;
  Regime regime;
  CornerChain sub;
  CornerChain sup;
  LocalConstants constants;
};

CornerSet compute_corners(const Params& p);
CornerChain subcritical_corners(const Params& p);
CornerChain supercritical_corners(const Params& p);
LocalConstants local_constants(const Params& p);

struct Inequality {
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = true;

  bool holds() const { return strict ? lhs < rhs : lhs <= rhs; }
  double margin() const { return rhs - lhs; }
};

struct Admissibility {
  // The subcritical chain only needs closing conditions in Scenario II.
  bool applicable = false;
  bool ac3_required = false;
  bool ac1 = true, ac2 = true, ac3 = true;
  std::optional<Inequality> ac1e, ac2e, ac3e, ac3_explicit;
  bool sup_s2 = true, sup_w3 = true, sup_wstar = true;

  bool closes() const { return ac1 && ac2 && (!ac3_required || ac3); }
  std::string closure() const;
  // Empty when closes(); otherwise a message with the violated inequality.
  std::string failure() const;
};

Admissibility admissibility(const CornerSet& corners);

double g_flat(const Params& p);
double g_sharp(const Params& p);

}  // namespace ctepa
