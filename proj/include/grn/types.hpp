#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace grn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Finite stand-in for an infinite second-order step-size (no regularization).
inline constexpr double kGammaMax = 1e12;

/// Raised when the regularized system cannot be factorized even after jitter.
class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatches and violated preconditions on user input.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_dim(Index got, Index want, const char* what) {
  if (got != want) {
    throw DomainError(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                      ", expected " + std::to_string(want) + ")");
  }
}

}  // namespace grn
