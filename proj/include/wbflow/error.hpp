#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace wbflow {

// Raised before any computation when inputs violate a precondition.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an iterative solver stops without meeting its tolerance.
class solver_error : public std::runtime_error {
 public:
  solver_error(const std::string& what, double residual, long step = -1)
      : std::runtime_error(what), residual_(residual), step_(step) {}

  double residual() const noexcept { return residual_; }
  // Time-step index for multi-step drivers, -1 otherwise.
  long step() const noexcept { return step_; }

 private:
  double residual_;
  long step_;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace wbflow
