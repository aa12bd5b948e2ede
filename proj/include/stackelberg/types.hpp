#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stackelberg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent block dimensions in game data.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormError : public Error {
 public:
  using Error::Error;
};

// An iterative method hit its iteration cap. Carries the last residual.
class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& what, double last_residual)
      : Error(what + " (last residual " + std::to_string(last_residual) + ")"),
        last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

// Dykstra stalled above tolerance: the intersection is probably empty.
class EmptyIntersectionError : public Error {
 public:
  EmptyIntersectionError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class DegenerateMultiplierError : public Error {
 public:
  DegenerateMultiplierError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace stackelberg
