#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ctepa/core.hpp"

namespace ctepa::verify {

// Corner values obtained independently of the closed forms, keyed w1, s2, w3,
// s4, w_star, wt1, st2, wt3, wt_star; missing keys mean "not reached".
using CornerOracle = std::function<std::map<std::string, double>(const Params&)>;

struct Options {
  std::uint64_t seed = 7;
  CornerOracle oracle;  // required by the corners suite
};

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string summary;  // one line, deterministic for a given seed
  std::map<std::string, double> metrics;
};

// Random parameters of a given alignment with moderate gaps between the bounds.
Params sample_params(std::mt19937_64& rng, Alignment want, double c_gap = 0.3, double nu_gap = 0.4);

Result corners(const Options& opt);      // closed forms against the oracle
Result level_sets(const Options& opt);   // L vanishes along every boundary curve
Result comparison(const Options& opt);   // sign preservation in the localized areas
Result invariance(const Options& opt);   // invariant regions and blowup passage
Result super_auto(const Options& opt);   // supercritical conditions hold unconditionally
Result reductions(const Options& opt);   // constant-coefficient special cases
Result pde(const Options& opt);          // particle solver end to end
Result vacuum(const Options& opt);       // vacuum characteristics
Result zero_alignment(const Options& opt);  // nu -> 0 limit against the two candidate formulas

struct Suite {
  std::string name;
  std::function<Result(const Options&)> run;
};

// In criterion order.
const std::vector<Suite>& suites();

// "all" or one suite name; ConfigError for unknown names.
std::vector<Result> run(const std::string& which, const Options& opt,
                        const std::function<void(const Result&, double seconds)>& on_result = {});

// "[PASS] 1 corners: ..." line.
std::string format(const Result& r);

}  // namespace ctepa::verify
