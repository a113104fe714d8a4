#pragma once

#include <stdexcept>
#include <string>

namespace psl {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BoundsViolation : public Error {
 public:
  using Error::Error;
};

/// CoM surface at or below the foot, inconsistent apex heights, ...
class GeometryError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class PlanningInfeasible : public Error {
 public:
  using Error::Error;
};

class NoTransition : public Error {
 public:
  using Error::Error;
};

class DegenerateTransition : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double best_iterate,
                 double best_residual)
      : Error(what), best_iterate_(best_iterate), best_residual_(best_residual) {}
  double best_iterate() const { return best_iterate_; }
  double best_residual() const { return best_residual_; }

 private:
  double best_iterate_;
  double best_residual_;
};

class AutomatonError : public Error {
 public:
  using Error::Error;
};

class InfeasibleReplan : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, const std::string& message)
      : Error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace psl
