#pragma once

#include <cmath>
#include <random>

#include "ctepa/core.hpp"

namespace testing_params {

// Random parameters of a requested alignment with moderate gaps.
inline ctepa::Params random_params(std::mt19937_64& rng, ctepa::Alignment want, double c_gap = 0.3,
                                   double nu_gap = 0.4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double k = 0.5 + 1.5 * u(rng);
    const double cm = 0.5 + u(rng);
    const double cp = cm * (1.0 + c_gap * u(rng));
    const double scale = 2.0 * std::sqrt(k * cm);
    const double nm = scale * (0.1 + 1.6 * u(rng));
    const double np = nm * (1.0 + nu_gap * u(rng));
    const ctepa::Params p = ctepa::validate(k, cm, cp, nm, np);
    if (ctepa::classify_regime(p).label == want) return p;
  }
}

}  // namespace testing_params
