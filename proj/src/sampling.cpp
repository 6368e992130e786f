#include "iar/sampling.hpp"

#include "iar/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace iar {

double bernstein_log_argument(SampleOrder order, Index n, double t) {
  switch (order) {
    case SampleOrder::value:
      return 2.0 / t;
    case SampleOrder::gradient:
      return static_cast<double>(n + 1) / t;
    case SampleOrder::hessian:
      return 2.0 * static_cast<double>(n) / t;
  }
  return 2.0 / t;
}

Index bernstein_size(double kappa, double nu, double t, double log_argument, Index N) {
  if (!(kappa > 0.0)) throw ParameterError("bernstein_size: kappa must be positive");
  if (!(nu > 0.0)) throw ParameterError("bernstein_size: nu must be positive");
  if (!(t > 0.0 && t < 1.0)) throw ParameterError("bernstein_size: t must lie in (0, 1)");
  if (!(log_argument > 1.0)) throw ParameterError("bernstein_size: log argument must exceed 1");
  if (N < 1) throw ParameterError("bernstein_size: N must be positive");

  const double ratio = kappa / nu;
  const double bound = std::ceil(4.0 * ratio * (2.0 * ratio + 1.0 / 3.0) * std::log(log_argument));
  if (!(bound < static_cast<double>(N))) return N;  // also catches overflow to inf
  return std::max<Index>(1, static_cast<Index>(bound));
}

Index sample_size_for(SampleOrder order, double kappa, double nu, double t, Index n, Index N) {
  if (!(nu > 0.0)) return N;
  return bernstein_size(kappa, nu, t, bernstein_log_argument(order, n, t), N);
}

IndexSet draw_subsample(std::mt19937_64& engine, Index N, Index m) {
  if (m < 1 || m > N) {
    throw ParameterError("draw_subsample: need 1 <= m <= N, got m=" + std::to_string(m) +
                         ", N=" + std::to_string(N));
  }
  IndexSet out(static_cast<std::size_t>(m));
  if (m == N) {
    std::iota(out.begin(), out.end(), Index{0});
    return out;
  }
  std::vector<char> taken(static_cast<std::size_t>(N), 0);
  std::size_t k = 0;
  for (Index j = N - m; j < N; ++j) {
    auto r = static_cast<Index>(uniform_index(engine, static_cast<std::uint64_t>(j) + 1));
    if (taken[static_cast<std::size_t>(r)]) r = j;
    taken[static_cast<std::size_t>(r)] = 1;
    out[k++] = r;
  }
  std::sort(out.begin(), out.end());
  return out;
}

double estimate_value(const FiniteSumProblem& problem, const IndexSet& indices, const Vector& x) {
  return detail::mean_value(problem, indices, x);
}

Vector estimate_gradient(const FiniteSumProblem& problem, const IndexSet& indices,
                         const Vector& x) {
  return detail::mean_gradient(problem, indices, x);
}

Vector estimate_hvp(const FiniteSumProblem& problem, const IndexSet& indices, const Vector& x,
                    const Vector& v) {
  return detail::mean_hvp(problem, indices, x, v);
}

SubsampledHessian::SubsampledHessian(const FiniteSumProblem& problem, IndexSet indices,
                                     Vector base_point)
    : problem_(problem), indices_(std::move(indices)), base_point_(std::move(base_point)) {
  detail::require(!indices_.empty(), "SubsampledHessian: empty index set");
  detail::require_size(base_point_.size(), problem_.dimension(), "SubsampledHessian: x");
  if (!problem_.exact_hvp()) base_gradient_ = detail::mean_gradient(problem_, indices_, base_point_);
}

SubsampledHessian::SubsampledHessian(const FiniteSumProblem& problem, IndexSet indices,
                                     Vector base_point, Vector base_gradient)
    : problem_(problem),
      indices_(std::move(indices)),
      base_point_(std::move(base_point)),
      base_gradient_(std::move(base_gradient)) {
  detail::require(!indices_.empty(), "SubsampledHessian: empty index set");
  detail::require_size(base_point_.size(), problem_.dimension(), "SubsampledHessian: x");
  detail::require_size(base_gradient_.size(), problem_.dimension(), "SubsampledHessian: gradient");
}

Vector SubsampledHessian::apply(const Vector& v) {
  detail::require_size(v.size(), problem_.dimension(), "SubsampledHessian: v");
  if (v.isZero(0.0)) return Vector::Zero(v.size());
  ++products_;
  return detail::mean_hvp_from(problem_, indices_, base_point_, base_gradient_, v);
}

AuditResult audit_accuracy(const FiniteSumProblem& problem, const Vector& x, double nu,
                           double kappa, double t, SampleOrder order, Index trials,
                           std::mt19937_64& engine) {
  if (order == SampleOrder::hessian) throw ParameterError("audit_accuracy: order must be 0 or 1");
  if (trials < 1) throw ParameterError("audit_accuracy: trials must be positive");
  const Index N = problem.size();
  AuditResult result;
  result.trials = trials;
  result.sample_size =
      bernstein_size(kappa, nu, t, bernstein_log_argument(order, problem.dimension(), t), N);

  if (order == SampleOrder::value) {
    const double exact = full_value(problem, x);
    for (Index k = 0; k < trials; ++k) {
      const auto sample = draw_subsample(engine, N, result.sample_size);
      if (std::abs(estimate_value(problem, sample, x) - exact) > nu) ++result.failures;
    }
  } else {
    const Vector exact = full_gradient(problem, x);
    for (Index k = 0; k < trials; ++k) {
      const auto sample = draw_subsample(engine, N, result.sample_size);
      if ((estimate_gradient(problem, sample, x) - exact).norm() > nu) ++result.failures;
    }
  }
  return result;
}

}  // namespace iar
