#pragma once

#include "iar/common.hpp"

#include <ranges>
#include <vector>

namespace iar {

/// Ascending list of component indices (0-based).
using IndexSet = std::vector<Index>;

/// Objective f(x) = (1/N) sum_i f_i(x) accessed one component at a time.
///
/// Implementations must be deterministic and safe to call concurrently from
/// several threads (all methods are const and must not mutate shared state).
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  /// Number of parameters n.
  virtual Index dimension() const = 0;
  /// Number of components N.
  virtual Index size() const = 0;

  virtual double component_value(Index i, const Vector& x) const = 0;
  virtual Vector component_gradient(Index i, const Vector& x) const = 0;

  /// sum += grad f_i(x). Override to avoid the temporary.
  virtual void accumulate_gradient(Index i, const Vector& x, Vector& sum) const {
    sum += component_gradient(i, x);
  }

  /// True when component_hvp is analytic rather than a difference of gradients.
  virtual bool exact_hvp() const { return false; }

  /// Forward difference of the component gradient along v; zero for v = 0.
  virtual Vector component_hvp(Index i, const Vector& x, const Vector& v) const;
};

/// Forward-difference step h = sqrt(u) (1 + |x|) / max(|v|, u).
double hvp_step(const Vector& x, const Vector& v);

namespace detail {

void check_index(const FiniteSumProblem& problem, Index i);

template <typename Range>
double mean_value(const FiniteSumProblem& problem, const Range& indices, const Vector& x) {
  require_size(x.size(), problem.dimension(), "mean_value: x");
  const auto count = static_cast<double>(std::ranges::size(indices));
  require(count > 0, "mean_value: empty index set");
  double sum = 0.0;
  for (Index i : indices) sum += problem.component_value(i, x);
  return sum / count;
}

template <typename Range>
Vector mean_gradient(const FiniteSumProblem& problem, const Range& indices, const Vector& x) {
  require_size(x.size(), problem.dimension(), "mean_gradient: x");
  const auto count = static_cast<double>(std::ranges::size(indices));
  require(count > 0, "mean_gradient: empty index set");
  Vector sum = Vector::Zero(x.size());
  for (Index i : indices) problem.accumulate_gradient(i, x, sum);
  sum /= count;
  return sum;
}

/// Hessian action of the mean over `indices`, given the mean gradient at x.
///
/// For difference-based problems this is (mean_grad(x + h v) - mean_grad(x)) / h,
/// which equals the mean of component_hvp up to rounding.
template <typename Range>
Vector mean_hvp_from(const FiniteSumProblem& problem, const Range& indices, const Vector& x,
                     const Vector& grad_at_x, const Vector& v) {
  require_size(v.size(), problem.dimension(), "mean_hvp: v");
  const auto count = static_cast<double>(std::ranges::size(indices));
  require(count > 0, "mean_hvp: empty index set");
  if (v.isZero(0.0)) return Vector::Zero(v.size());
  if (problem.exact_hvp()) {
    Vector sum = Vector::Zero(v.size());
    for (Index i : indices) sum += problem.component_hvp(i, x, v);
    sum /= count;
    return sum;
  }
  const double h = hvp_step(x, v);
  const Vector shifted = x + h * v;
  return (mean_gradient(problem, indices, shifted) - grad_at_x) / h;
}

template <typename Range>
Vector mean_hvp(const FiniteSumProblem& problem, const Range& indices, const Vector& x,
                const Vector& v) {
  require_size(x.size(), problem.dimension(), "mean_hvp: x");
  require_size(v.size(), problem.dimension(), "mean_hvp: v");
  if (v.isZero(0.0)) return Vector::Zero(v.size());
  if (problem.exact_hvp()) return mean_hvp_from(problem, indices, x, Vector(), v);
  return mean_hvp_from(problem, indices, x, mean_gradient(problem, indices, x), v);
}

inline auto all_indices(const FiniteSumProblem& problem) {
  return std::views::iota(Index{0}, problem.size());
}

}  // namespace detail

double full_value(const FiniteSumProblem& problem, const Vector& x);
Vector full_gradient(const FiniteSumProblem& problem, const Vector& x);
Vector full_hvp(const FiniteSumProblem& problem, const Vector& x, const Vector& v);

/// f_i(x) = |x|^2 for every i; exact Hessian 2I. Used by tests and examples.
class SquaredNormProblem final : public FiniteSumProblem {
 public:
  SquaredNormProblem(Index dimension, Index components) : n_(dimension), count_(components) {}
  Index dimension() const override { return n_; }
  Index size() const override { return count_; }
  double component_value(Index i, const Vector& x) const override;
  Vector component_gradient(Index i, const Vector& x) const override;
  bool exact_hvp() const override { return true; }
  Vector component_hvp(Index i, const Vector& x, const Vector& v) const override;

 private:
  Index n_;
  Index count_;
};

/// Presents every component of `base` twice (N -> 2N); the mean is unchanged.
class DuplicatedProblem final : public FiniteSumProblem {
 public:
  explicit DuplicatedProblem(const FiniteSumProblem& base) : base_(base) {}
  Index dimension() const override { return base_.dimension(); }
  Index size() const override { return 2 * base_.size(); }
  double component_value(Index i, const Vector& x) const override {
    return base_.component_value(i % base_.size(), x);
  }
  Vector component_gradient(Index i, const Vector& x) const override {
    return base_.component_gradient(i % base_.size(), x);
  }
  bool exact_hvp() const override { return base_.exact_hvp(); }
  Vector component_hvp(Index i, const Vector& x, const Vector& v) const override {
    return base_.component_hvp(i % base_.size(), x, v);
  }

 private:
  const FiniteSumProblem& base_;
};

}  // namespace iar
