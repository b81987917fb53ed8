#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace conelab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown when an operation is evaluated outside its domain (e.g. grad at 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid construction parameters or violated preconditions.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative method stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

// An improper integral whose tail does not converge.
class IntegrabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace conelab
