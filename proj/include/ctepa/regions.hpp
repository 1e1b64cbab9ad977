#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ctepa/lyapunov.hpp"
#include "ctepa/phaseplane.hpp"

namespace ctepa {

enum class RegionKind { Subcritical, Supercritical };

// One boundary piece: the table describing it and the s-range it covers,
// ordered from the corner where the construction enters to where it leaves.
struct Curve {
  std::string id;
  LyapunovTable table;
  double s_begin;
  double s_end;
};

struct PolylinePoint {
  std::string segment;
  double w;
  double s;
};

class Region {
 public:
  Region(RegionKind kind, CornerSet corners, Admissibility adm, std::vector<Curve> curves, double left_break,
         double right_break, double cap);

  RegionKind kind() const { return kind_; }
  const Regime& regime() const { return corners_.regime; }
  const CornerSet& corners() const { return corners_; }
  const Admissibility& admissibility() const { return adm_; }
  const std::vector<Curve>& curves() const { return curves_; }
  // The right boundary exists only in Scenarios II and IV.
  bool bounded() const { return curves_.size() == 4; }
  // Upper limit in s of the enclosed set (infinite when unbounded).
  double cap() const { return cap_; }
  double left_break() const { return left_break_; }
  double right_break() const { return right_break_; }

  double W_left(double s) const;
  double W_right(double s) const;
  const Curve& left_curve(double s) const;
  const Curve& right_curve(double s) const;

  // Membership: the subcritical region is open, the supercritical one closed.
  bool contains(double w, double s) const;
  // Positive inside, negative outside, with magnitude comparable to the
  // distance (in w or s) to the nearest boundary piece.
  double margin(double w, double s) const;

  std::vector<PolylinePoint> polylines(int resolution = 512, double unbounded_extent = 0.0) const;

 private:
  double enclosed_margin(double w, double s) const;

  RegionKind kind_;
  CornerSet corners_;
  Admissibility adm_;
  std::vector<Curve> curves_;
  double left_break_, right_break_, cap_;
};

// Throws InadmissibleError with the violated inequality in Scenario II when
// the construction does not close.
Region build_subcritical(const Params& p, int table_points = kDefaultTablePoints);
Region build_supercritical(const Params& p, int table_points = kDefaultTablePoints);

enum class Verdict { Subcritical, Supercritical, Indeterminate };
std::string_view to_string(Verdict v);

struct Classification {
  Verdict verdict;
  std::string decided_by;
};

// Both regions for one parameter set, built once and shared by classifiers.
class Thresholds {
 public:
  explicit Thresholds(const Params& p, int table_points = kDefaultTablePoints);

  const Params& params() const { return params_; }
  const CornerSet& corners() const { return sup_.corners(); }
  const Admissibility& admissibility() const { return sup_.admissibility(); }
  const std::optional<Region>& subcritical() const { return sub_; }
  const Region& supercritical() const { return sup_; }

  Classification classify_ws(double w, double s) const;
  // Evaluated through the density-branch conditions directly rather than by
  // changing variables, so it doubles as a consistency check.
  Classification classify_Grho(double G, double rho) const;

 private:
  Params params_;
  std::optional<Region> sub_;
  Region sup_;
};

Classification classify_ws(const Params& p, double w, double s);
Classification classify_Grho(const Params& p, double G, double rho);

// segment_id,w,s,G,rho rows.
void write_curves_csv(std::ostream& os, const std::vector<PolylinePoint>& points);

}  // namespace ctepa
