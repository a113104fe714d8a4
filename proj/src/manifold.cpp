#include "psl/manifold.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "psl/errors.hpp"

namespace psl {

double sigma_general(const SagittalState& s, double x0, double xdot0,
                     double x_foot, double omega) {
  const double w2 = omega * omega;
  const double d0 = x0 - x_foot;
  const double d = s.x - x_foot;
  const double v02 = xdot0 * xdot0;
  const double v2 = s.xdot * s.xdot;
  return d0 * d0 * (2.0 * v02 - v2 + w2 * (s.x - x0) * (s.x + x0 - 2.0 * x_foot)) -
         v02 * d * d + v02 * (v2 - v02) / w2;
}

double sigma_apex(const SagittalState& s, const ManifoldDescriptor& m) {
  const double w2 = m.omega * m.omega;
  const double va2 = m.xdot_apex * m.xdot_apex;
  const double d = s.x - m.x_foot;
  return va2 / w2 * (s.xdot * s.xdot - va2 - w2 * d * d);
}

double zeta(const SagittalState& s, double x0, double xdot0, double x_foot,
            double omega, double zeta0) {
  if (xdot0 == 0.0) {
    throw DomainError("zeta: reference velocity is zero");
  }
  if (x0 == x_foot) {
    throw DomainError("zeta: reference point lies on the foot");
  }
  const double ratio = s.xdot / xdot0;
  if (ratio < 0.0) {
    throw DomainError(fmt::format(
        "zeta: velocity {} has the opposite sign of the reference {}", s.xdot,
        xdot0));
  }
  return zeta0 * std::pow(ratio, omega * omega) * (s.x - x_foot) / (x0 - x_foot);
}

double sensitivity_norm(std::span<const ProgressionSample> samples,
                        double zeta_d, double zeta_trans) {
  if (samples.size() < 2) {
    throw InsufficientData(fmt::format(
        "sensitivity norm needs at least two samples, got {}", samples.size()));
  }
  if (!(zeta_trans > zeta_d)) {
    throw DomainError("sensitivity norm: empty progression interval");
  }
  double integral = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& a = samples[i - 1];
    const auto& b = samples[i];
    integral += 0.5 * (a.sigma * a.sigma + b.sigma * b.sigma) * (b.zeta - a.zeta);
  }
  return std::sqrt(std::max(0.0, integral / (zeta_trans - zeta_d)));
}

}  // namespace psl
