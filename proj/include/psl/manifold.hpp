#pragma once

#include <span>

#include "psl/pendulum.hpp"

namespace psl {

/// Nominal phase-space manifold through the apex (x_foot, xdot_apex).
struct ManifoldDescriptor {
  double xdot_apex = 0.6;  // [m/s]
  double x_foot = 0.0;     // [m]
  double omega = 3.13;     // [1/s]

  bool operator==(const ManifoldDescriptor&) const = default;
};

struct BundleSpec {
  double epsilon = 1e-3;  // same units as sigma
};

/// Tangent manifold through an arbitrary initial condition (x0, xdot0).
double sigma_general(const SagittalState& s, double x0, double xdot0,
                     double x_foot, double omega);

/// Tangent manifold through the apex; zero on the nominal curve, positive
/// when faster than nominal.
double sigma_apex(const SagittalState& s, const ManifoldDescriptor& m);

/// Cotangent (progression) manifold; orthogonal to the sigma isolines.
/// Requires xdot0 != 0, x0 != x_foot and xdot sharing the sign of xdot0.
double zeta(const SagittalState& s, double x0, double xdot0, double x_foot,
            double omega, double zeta0 = 1.0);

struct ProgressionSample {
  double zeta = 0.0;
  double sigma = 0.0;
};

/// RMS of sigma over the progression interval [zeta_d, zeta_trans] by the
/// trapezoid rule on the given samples.
double sensitivity_norm(std::span<const ProgressionSample> samples,
                        double zeta_d, double zeta_trans);

inline bool bundle_contains(double sigma, const BundleSpec& spec) {
  return sigma <= spec.epsilon && sigma >= -spec.epsilon;
}

/// Scale of sigma used for tolerances: xdot_apex^4 / omega^2.
inline double sigma_scale(const ManifoldDescriptor& m) {
  const double v2 = m.xdot_apex * m.xdot_apex;
  return v2 * v2 / (m.omega * m.omega);
}

}  // namespace psl
