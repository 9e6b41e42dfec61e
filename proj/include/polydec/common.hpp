#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace polydec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Shapes of two operands do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the domain of the operation (m = 0, bad mode, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A weight could not be formed because a variance or block is singular.
class SingularWeightError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Branch reconstruction failed (degenerate abscissae, ill-conditioned fit).
class ReconstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every ALS restart produced a non-finite cost.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string shape(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace detail
}  // namespace polydec
