#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace iar {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Matrix-free symmetric operator v -> A v.
template <typename Scalar>
using LinearOperator = std::function<VectorX<Scalar>(const VectorX<Scalar>&)>;

/// Argument sizes or preconditions violated by the caller.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Out-of-range configuration or algorithm parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values or iterative solver failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw ContractError(what);
}

inline void require_size(Index actual, Index expected, const char* what) {
  if (actual != expected) {
    throw ContractError(std::string(what) + ": expected length " + std::to_string(expected) +
                        ", got " + std::to_string(actual));
  }
}

}  // namespace detail
}  // namespace iar
