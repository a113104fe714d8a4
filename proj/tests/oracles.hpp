#pragma once

// Reference formulas written out independently of the library, used as test
// oracles.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

namespace psl::oracle {

struct Phase {
  double x;
  double xd;
};

/// Unforced flow of xdd = w^2 (x - f) in closed form.
inline Phase flow(double x0, double xd0, double f, double w, double t) {
  const double c = std::cosh(w * t);
  const double s = std::sinh(w * t);
  return {(x0 - f) * c + (xd0 / w) * s + f, w * (x0 - f) * s + xd0 * c};
}

/// Plain RK4 on xdd = w^2 (x - f) - w^2 tau / (m g) with a fixed step.
inline Phase rk4(Phase p, double f, double w, double tau, double m, double g,
                 double h, long n) {
  const auto acc = [&](double x) { return w * w * (x - f) - w * w * tau / (m * g); };
  for (long i = 0; i < n; ++i) {
    const double k1x = p.xd, k1v = acc(p.x);
    const double k2x = p.xd + 0.5 * h * k1v, k2v = acc(p.x + 0.5 * h * k1x);
    const double k3x = p.xd + 0.5 * h * k2v, k3v = acc(p.x + 0.5 * h * k2x);
    const double k4x = p.xd + h * k3v, k4v = acc(p.x + h * k3x);
    p.x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    p.xd += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return p;
}

/// (v^2 / w^2) (xd^2 - v^2 - w^2 (x - f)^2).
inline double sigma(double x, double xd, double v, double f, double w) {
  return v * v / (w * w) * (xd * xd - v * v - w * w * (x - f) * (x - f));
}

/// Crossing of two equal-omega apex manifolds, from equating xd^2.
inline double equal_omega_crossing(double f1, double v1, double f2, double v2,
                                   double w) {
  return 0.5 * (f1 + f2) + (v1 * v1 - v2 * v2) / (2.0 * w * w * (f1 - f2));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace psl::oracle
