#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace saapde {

// Bad user input: config files, CLI arguments, parameter preconditions.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: singular systems, non-convergent solves.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A coefficient model left the declared ellipticity band [gamma, L].
// Carries the witness location (x, xi) and the offending field value.
class EllipticityViolation : public NumericError {
 public:
  EllipticityViolation(std::string what, Eigen::VectorXd x, Eigen::VectorXd xi,
                       double value)
      : NumericError(std::move(what)),
        x(std::move(x)),
        xi(std::move(xi)),
        value(value) {}

  Eigen::VectorXd x;
  Eigen::VectorXd xi;
  double value;
};

// A quadratic-growth certificate trial failed; carries the witness control.
class CertificateViolation : public NumericError {
 public:
  CertificateViolation(std::string what, Eigen::VectorXd witness, double slack)
      : NumericError(std::move(what)),
        witness(std::move(witness)),
        slack(slack) {}

  Eigen::VectorXd witness;
  double slack;
};

// A stability inequality check failed; the message carries all quantities.
class InequalityViolation : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace saapde
