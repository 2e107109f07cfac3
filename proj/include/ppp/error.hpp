#ifndef PPP_ERROR_HPP
#define PPP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ppp {

// Argument outside the mathematical domain of an operation (support of a
// distribution, probability outside (0,1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// x_{N/2} == x_N: the normalization denominator vanishes.
class DegenerateSampleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// The estimate lies outside the range covered by an increment table.
class OutOfRangeError : public DomainError {
 public:
  OutOfRangeError(const std::string& what, double psi_hat)
      : DomainError(what), psi_hat_(psi_hat) {}
  double psi_hat() const noexcept { return psi_hat_; }

 private:
  double psi_hat_;
};

// No tail parameter reproduces the requested normalized level.
class NoSolutionError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Bad configuration or malformed user input.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ppp

#endif  // PPP_ERROR_HPP
