#pragma once

#include "iar/common.hpp"
#include "iar/finite_sum.hpp"

#include <random>

namespace iar {

/// Derivative order a subsample estimates: function value, gradient or Hessian.
enum class SampleOrder { value = 0, gradient = 1, hessian = 2 };

/// Argument of the logarithm in the Bernstein sample size: 2/t, (n+1)/t or 2n/t.
double bernstein_log_argument(SampleOrder order, Index n, double t);

/// min{N, ceil((4 kappa / nu) (2 kappa / nu + 1/3) ln(log_argument))}, at least 1.
///
/// Samples of this size estimate a mean of terms bounded by kappa to within nu
/// with probability at least 1 - t (operator Bernstein inequality).
Index bernstein_size(double kappa, double nu, double t, double log_argument, Index N);

/// Bernstein size for a target accuracy; nu <= 0 asks for the full sample.
Index sample_size_for(SampleOrder order, double kappa, double nu, double t, Index n, Index N);

/// m distinct indices drawn uniformly from [0, N), sorted ascending.
///
/// Uses Floyd's algorithm on uniform_index(); m == N returns every index
/// without touching the engine.
IndexSet draw_subsample(std::mt19937_64& engine, Index N, Index m);

double estimate_value(const FiniteSumProblem& problem, const IndexSet& indices, const Vector& x);
Vector estimate_gradient(const FiniteSumProblem& problem, const IndexSet& indices,
                         const Vector& x);
Vector estimate_hvp(const FiniteSumProblem& problem, const IndexSet& indices, const Vector& x,
                    const Vector& v);

/// Subsampled Hessian at a fixed point, available only through its action.
///
/// The mean gradient over the sample at the base point is computed once at
/// construction; each apply() then costs one gradient pass over the sample.
class SubsampledHessian {
 public:
  SubsampledHessian(const FiniteSumProblem& problem, IndexSet indices, Vector base_point);
  /// As above with the mean gradient over `indices` at the base point supplied.
  SubsampledHessian(const FiniteSumProblem& problem, IndexSet indices, Vector base_point,
                    Vector base_gradient);

  Vector apply(const Vector& v);

  /// Number of apply() calls that evaluated the sample.
  Index products() const { return products_; }
  const IndexSet& indices() const { return indices_; }

  LinearOperator<double> as_operator() {
    return [this](const Vector& v) { return apply(v); };
  }

 private:
  const FiniteSumProblem& problem_;
  IndexSet indices_;
  Vector base_point_;
  Vector base_gradient_;
  Index products_ = 0;
};

struct AuditResult {
  Index sample_size = 0;
  Index failures = 0;
  Index trials = 0;
  double failure_rate() const {
    return trials == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(trials);
  }
};

/// Monte-Carlo check of the Bernstein guarantee at x for order 0 or 1.
///
/// Draws `trials` subsamples of the Bernstein size and counts those whose
/// estimate misses the exact value by more than nu.
AuditResult audit_accuracy(const FiniteSumProblem& problem, const Vector& x, double nu,
                           double kappa, double t, SampleOrder order, Index trials,
                           std::mt19937_64& engine);

}  // namespace iar
