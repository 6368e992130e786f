#pragma once

#include "iar/common.hpp"
#include "iar/model.hpp"
#include "iar/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace iar {

/// Barzilai-Borwein solver settings for the cubic model.
struct BBConfig {
  Index max_inner_iterations = 500;
  double step_min = 1e-10;
  double step_max = 1e10;
  Index memory = 10;          // nonmonotone reference window M
  double armijo = 1e-4;       // sufficient-decrease constant delta
  double backtrack = 0.5;
  Index max_backtracks = 60;

  void validate() const {
    if (max_inner_iterations < 1) throw ParameterError("BBConfig: max_inner_iterations must be >= 1");
    if (!(step_min > 0 && step_min < step_max)) throw ParameterError("BBConfig: need 0 < step_min < step_max");
    if (memory < 1) throw ParameterError("BBConfig: memory must be >= 1");
    if (!(armijo > 0 && armijo < 1)) throw ParameterError("BBConfig: armijo must lie in (0, 1)");
    if (!(backtrack > 0 && backtrack < 1)) throw ParameterError("BBConfig: backtrack must lie in (0, 1)");
  }
};

enum class StepStatus { converged, budget_exhausted, line_search_stalled };

template <typename Scalar>
struct StepResult {
  VectorX<Scalar> step;
  Scalar delta_T_f = 0;
  ModelPoint<Scalar> at_step;  // model value and gradient at `step`
  Index iterations = 0;
  Index hessian_products = 0;
  StepStatus status = StepStatus::converged;
};

/// Global minimiser of the quadratic model: s = -g / sigma, Delta T = |g|^2 / sigma.
template <typename Scalar>
StepResult<Scalar> quadratic_step(const VectorX<Scalar>& g, Scalar sigma) {
  if (!(sigma > 0)) throw ParameterError("quadratic_step: sigma must be positive");
  StepResult<Scalar> out;
  out.step = -g / sigma;
  out.delta_T_f = g.squaredNorm() / sigma;
  out.at_step.value = -out.delta_T_f / 2;
  out.at_step.gradient = VectorX<Scalar>::Zero(g.size());
  return out;
}

/// Spectral step ds^T ds / ds^T dg clamped to [lo, hi]; hi on non-positive curvature.
template <typename Scalar>
Scalar bb_step_length(const VectorX<Scalar>& ds, const VectorX<Scalar>& dg, Scalar lo, Scalar hi) {
  const Scalar curvature = ds.dot(dg);
  if (!(curvature > 0)) return hi;
  return std::clamp<Scalar>(ds.squaredNorm() / curvature, lo, hi);
}

/// Approximate minimiser of the cubic model by Barzilai-Borwein gradient steps
/// with a nonmonotone Armijo line search over the last M model values.
///
/// Stops once |grad m(s)| <= tolerance. Each outer BB iteration uses one
/// Hessian action; trial points along the search direction reuse it by
/// linearity. Every iterate satisfies m(s) <= m(0) = 0. On budget exhaustion
/// the iterate with the smallest model gradient is returned.
template <typename Scalar>
StepResult<Scalar> cubic_step(const RegularisedModel<Scalar>& model, const BBConfig& config,
                              Scalar tolerance, const VectorX<Scalar>* start = nullptr) {
  if (model.order != 2) throw ParameterError("cubic_step: model order must be 2");
  config.validate();
  const Index n = model.dimension();
  const Scalar lo = Scalar(config.step_min), hi = Scalar(config.step_max);

  StepResult<Scalar> out;
  VectorX<Scalar> s = start ? *start : VectorX<Scalar>::Zero(n);
  detail::require_size(s.size(), n, "cubic_step: start");
  VectorX<Scalar> hs = VectorX<Scalar>::Zero(n);
  if (!s.isZero(0)) {
    hs = model.hessian(s);
    ++out.hessian_products;
  }
  ModelPoint<Scalar> current = model_point_from<Scalar>(model, s, hs);
  if (!std::isfinite(double(current.value)) || !current.gradient.allFinite()) {
    throw NumericalError("cubic_step: non-finite model value at start");
  }
  if (current.value > 0) throw ContractError("cubic_step: start point has positive model value");

  VectorX<Scalar> best_step = s;
  ModelPoint<Scalar> best = current;
  auto finish = [&](StepStatus status) {
    out.step = best_step;
    out.at_step = best;
    out.delta_T_f = regulariser(model, best_step) - best.value;
    out.status = status;
    if (best.value > 0) throw NumericalError("cubic_step: returned step increases the model");
    return out;
  };

  if (current.gradient.norm() <= tolerance) return finish(StepStatus::converged);

  std::deque<Scalar> recent{current.value};
  Scalar lambda = std::clamp<Scalar>(Scalar(1) / model.sigma, lo, hi);

  for (Index it = 0; it < config.max_inner_iterations; ++it) {
    out.iterations = it + 1;
    const VectorX<Scalar> d = -current.gradient;
    const VectorX<Scalar> hd = model.hessian(d);
    ++out.hessian_products;
    const Scalar slope = current.gradient.dot(d);
    const Scalar reference = *std::max_element(recent.begin(), recent.end());

    Scalar alpha = lambda;
    VectorX<Scalar> trial;
    ModelPoint<Scalar> next;
    bool accepted = false;
    for (Index bt = 0; bt <= config.max_backtracks; ++bt) {
      trial = s + alpha * d;
      next = model_point_from<Scalar>(model, trial, hs + alpha * hd);
      if (!std::isfinite(double(next.value)) || !next.gradient.allFinite()) {
        throw NumericalError("cubic_step: non-finite model value at inner iteration " +
                             std::to_string(it));
      }
      if (next.value <= reference + Scalar(config.armijo) * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= Scalar(config.backtrack);
    }
    if (!accepted) return finish(StepStatus::line_search_stalled);

    lambda = bb_step_length<Scalar>(trial - s, next.gradient - current.gradient, lo, hi);
    s = std::move(trial);
    hs = next.hessian_times_s;
    current = std::move(next);
    recent.push_back(current.value);
    if (static_cast<Index>(recent.size()) > config.memory) recent.pop_front();

    if (current.gradient.norm() < best.gradient.norm()) {
      best_step = s;
      best = current;
    }
    if (current.gradient.norm() <= tolerance) return finish(StepStatus::converged);
  }
  return finish(StepStatus::budget_exhausted);
}

/// cubic_step followed by negative-curvature escapes until the second-order
/// model measure phi_2(grad m(s), grad^2 m(s)) is at most `tolerance2`.
template <typename Scalar>
StepResult<Scalar> cubic_step_second_order(const RegularisedModel<Scalar>& model,
                                           const BBConfig& config, Scalar tolerance1,
                                           Scalar tolerance2, const TrustRegionOptions& tr = {},
                                           int max_escapes = 20) {
  StepResult<Scalar> result = cubic_step(model, config, tolerance1);
  Index iterations = result.iterations, products = result.hessian_products;
  for (int escape = 0; escape < max_escapes; ++escape) {
    const auto second = phi_2<Scalar>(result.at_step.gradient,
                                      model_hessian_operator(model, result.step), tr);
    if (second.value <= tolerance2) break;
    VectorX<Scalar> d = second.maximiser;
    if (d.dot(result.at_step.gradient) > 0) d = -d;
    // Move along d until the model decreases, then polish with BB again.
    Scalar alpha = 1;
    VectorX<Scalar> trial;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt, alpha /= 2) {
      trial = result.step + alpha * d;
      if (model_value(model, trial) < result.at_step.value) { moved = true; break; }
    }
    if (!moved) break;
    result = cubic_step(model, config, tolerance1, &trial);
    iterations += result.iterations;
    products += result.hessian_products;
  }
  result.iterations = iterations;
  result.hessian_products = products;
  return result;
}

}  // namespace iar
