#include "iar/finite_sum.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace iar {

double hvp_step(const Vector& x, const Vector& v) {
  constexpr double u = std::numeric_limits<double>::epsilon();
  return std::sqrt(u) * (1.0 + x.norm()) / std::max(v.norm(), u);
}

Vector FiniteSumProblem::component_hvp(Index i, const Vector& x, const Vector& v) const {
  detail::require_size(v.size(), dimension(), "component_hvp: v");
  if (v.isZero(0.0)) return Vector::Zero(v.size());
  const double h = hvp_step(x, v);
  const Vector shifted = x + h * v;
  return (component_gradient(i, shifted) - component_gradient(i, x)) / h;
}

namespace detail {

void check_index(const FiniteSumProblem& problem, Index i) {
  if (i < 0 || i >= problem.size()) {
    throw ContractError("component index " + std::to_string(i) + " out of range [0, " +
                        std::to_string(problem.size()) + ")");
  }
}

}  // namespace detail

double full_value(const FiniteSumProblem& problem, const Vector& x) {
  return detail::mean_value(problem, detail::all_indices(problem), x);
}

Vector full_gradient(const FiniteSumProblem& problem, const Vector& x) {
  return detail::mean_gradient(problem, detail::all_indices(problem), x);
}

Vector full_hvp(const FiniteSumProblem& problem, const Vector& x, const Vector& v) {
  return detail::mean_hvp(problem, detail::all_indices(problem), x, v);
}

double SquaredNormProblem::component_value(Index i, const Vector& x) const {
  detail::check_index(*this, i);
  detail::require_size(x.size(), n_, "component_value: x");
  return x.squaredNorm();
}

Vector SquaredNormProblem::component_gradient(Index i, const Vector& x) const {
  detail::check_index(*this, i);
  detail::require_size(x.size(), n_, "component_gradient: x");
  return 2.0 * x;
}

Vector SquaredNormProblem::component_hvp(Index i, const Vector&, const Vector& v) const {
  detail::check_index(*this, i);
  detail::require_size(v.size(), n_, "component_hvp: v");
  return 2.0 * v;
}

}  // namespace iar
