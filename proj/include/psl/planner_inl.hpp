#pragma once

#include <fmt/format.h>

#include "psl/errors.hpp"

namespace psl {

template <typename Level>
Crossing advance_until(const PhaseState& start, const StepParameters& p,
                       const Torques& u, double dt, Level&& level,
                       std::size_t max_steps) {
  PhaseState s = start;
  double t = 0.0;
  for (std::size_t k = 0; k < max_steps; ++k) {
    const PhaseState next = integrate_step(s, p, u, dt);
    if (level(next) >= 0.0) {
      double lo = 0.0;
      double hi = dt;
      PhaseState at_hi = next;
      for (int i = 0; i < 80 && hi - lo > 1e-15 * dt; ++i) {
        const double mid = 0.5 * (lo + hi);
        const PhaseState probe = integrate_step(s, p, u, mid);
        if (level(probe) >= 0.0) {
          hi = mid;
          at_hi = probe;
        } else {
          lo = mid;
        }
      }
      return {t + hi, at_hi};
    }
    s = next;
    t += dt;
  }
  throw DivergenceError(
      fmt::format("level not reached within {} integration steps", max_steps),
      max_steps);
}

}  // namespace psl
