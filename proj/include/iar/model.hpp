#pragma once

#include "iar/common.hpp"
#include "iar/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace iar {

/// Step argument; never participates in deduction so Eigen expressions convert.
template <typename Scalar>
using Step = std::type_identity_t<VectorX<Scalar>>;

/// Regularised inexact Taylor model around x_k, without the constant term:
///   p = 1:  m(s) = g^T s + sigma/2 |s|^2
///   p = 2:  m(s) = g^T s + 1/2 s^T H s + sigma/6 |s|^3
/// so that m(0) = 0.
template <typename Scalar>
struct RegularisedModel {
  int order = 1;
  VectorX<Scalar> gradient;
  LinearOperator<Scalar> hessian;  // set iff order == 2
  Scalar sigma = 1;

  RegularisedModel(VectorX<Scalar> g, Scalar sigma_)
      : order(1), gradient(std::move(g)), sigma(sigma_) {
    if (!(sigma > 0)) throw ParameterError("RegularisedModel: sigma must be positive");
  }

  RegularisedModel(VectorX<Scalar> g, LinearOperator<Scalar> H, Scalar sigma_)
      : order(2), gradient(std::move(g)), hessian(std::move(H)), sigma(sigma_) {
    if (!(sigma > 0)) throw ParameterError("RegularisedModel: sigma must be positive");
    if (!hessian) throw ParameterError("RegularisedModel: order 2 needs a Hessian action");
  }

  Index dimension() const { return gradient.size(); }
};

/// Model value and gradient at s sharing a single Hessian action.
template <typename Scalar>
struct ModelPoint {
  Scalar value = 0;
  VectorX<Scalar> gradient;
  VectorX<Scalar> hessian_times_s;  // empty for order 1
};

template <typename Scalar>
Scalar regulariser(const RegularisedModel<Scalar>& model, const Step<Scalar>& s) {
  const Scalar norm = s.norm();
  return model.order == 1 ? model.sigma / 2 * norm * norm : model.sigma / 6 * norm * norm * norm;
}

/// Builds the model quantities at s from a known H s (order 2).
template <typename Scalar>
ModelPoint<Scalar> model_point_from(const RegularisedModel<Scalar>& model, const Step<Scalar>& s,
                                    VectorX<Scalar> hs) {
  ModelPoint<Scalar> p;
  const Scalar norm = s.norm();
  if (model.order == 1) {
    p.value = model.gradient.dot(s) + model.sigma / 2 * norm * norm;
    p.gradient = model.gradient + model.sigma * s;
    return p;
  }
  p.value = model.gradient.dot(s) + Scalar(0.5) * s.dot(hs) + model.sigma / 6 * norm * norm * norm;
  p.gradient = model.gradient + hs + (model.sigma / 2 * norm) * s;
  p.hessian_times_s = std::move(hs);
  return p;
}

template <typename Scalar>
ModelPoint<Scalar> evaluate(const RegularisedModel<Scalar>& model, const Step<Scalar>& s) {
  detail::require_size(s.size(), model.dimension(), "model: step");
  if (model.order == 1) return model_point_from<Scalar>(model, s, VectorX<Scalar>());
  VectorX<Scalar> hs = s.isZero(0) ? VectorX<Scalar>::Zero(s.size()) : model.hessian(s);
  return model_point_from<Scalar>(model, s, std::move(hs));
}

template <typename Scalar>
Scalar model_value(const RegularisedModel<Scalar>& model, const Step<Scalar>& s) {
  return evaluate(model, s).value;
}

template <typename Scalar>
VectorX<Scalar> model_gradient(const RegularisedModel<Scalar>& model, const Step<Scalar>& s) {
  return evaluate(model, s).gradient;
}

/// Predicted decrease of the inexact Taylor expansion: -g^T s [- 1/2 s^T H s].
template <typename Scalar>
Scalar delta_T_f(const RegularisedModel<Scalar>& model, const Step<Scalar>& s) {
  return regulariser(model, s) - model_value(model, s);
}

/// |grad m(s)|, the first-order measure of the model at s.
template <typename Scalar>
Scalar phi_model_1(const RegularisedModel<Scalar>& model, const Step<Scalar>& s) {
  return model_gradient(model, s).norm();
}

/// grad^2 m(s) v = H v + sigma/2 (|s| v + (s^T v / |s|) s) for order 2.
template <typename Scalar>
LinearOperator<Scalar> model_hessian_operator(const RegularisedModel<Scalar>& model,
                                              const Step<Scalar>& s) {
  if (model.order == 1) {
    const Scalar sigma = model.sigma;
    return [sigma](const VectorX<Scalar>& v) { return VectorX<Scalar>(sigma * v); };
  }
  return [model, s](const VectorX<Scalar>& v) {
    const Scalar norm = s.norm();
    VectorX<Scalar> out = model.hessian(v);
    if (norm > 0) out += (model.sigma / 2) * (norm * v + (s.dot(v) / norm) * s);
    return out;
  };
}

/// Quantities of the derivative-accuracy test at a trial step.
template <typename Scalar>
struct AccuracyQuantities {
  Scalar tau = 0;
  Scalar delta_T_min = 0;
  Scalar delta_T_f = 0;
  Scalar model_grad_norm = 0;  // Delta T_{m,1}(s, d_1) = |grad m(s)|
  Scalar phi_model_2 = 0;      // Delta T_{m,2}(s, d_2), q = 2 only
  /// nu_l = omega * delta_T_min / (6 tau^l), l = 1, 2.
  Scalar target(int l, Scalar omega) const {
    if (delta_T_min <= 0 || tau <= 0) return Scalar(0);
    return omega * delta_T_min / (6 * std::pow(tau, l));
  }
};

/// tau and Delta T_min for step s, from a precomputed model point at s.
///
/// Maximisers of the order-j model decrease lie on the unit sphere unless the
/// corresponding measure vanishes, so tau = max(|s|, 1) except in the fully
/// degenerate case where tau = |s|. The inexact-model maximisers stand in for
/// the exact-model ones, which are not observable.
template <typename Scalar>
AccuracyQuantities<Scalar> accuracy_quantities(const RegularisedModel<Scalar>& model,
                                               const Step<Scalar>& s,
                                               const ModelPoint<Scalar>& at_s, int q,
                                               const TrustRegionOptions& tr = {}) {
  if (q < 1 || q > model.order) throw ParameterError("accuracy_quantities: need 1 <= q <= p");
  AccuracyQuantities<Scalar> out;
  out.delta_T_f = regulariser(model, s) - at_s.value;
  out.model_grad_norm = at_s.gradient.norm();
  Scalar maximiser_norm = out.model_grad_norm > 0 ? Scalar(1) : Scalar(0);
  out.delta_T_min = std::min(out.delta_T_f, out.model_grad_norm);
  if (q == 2) {
    const auto second = phi_2<Scalar>(at_s.gradient, model_hessian_operator(model, s), tr);
    out.phi_model_2 = second.value;
    out.delta_T_min = std::min(out.delta_T_min, second.value);
    maximiser_norm = std::max<Scalar>(maximiser_norm, second.maximiser.norm());
  }
  out.tau = std::max<Scalar>(s.norm(), maximiser_norm);
  return out;
}

template <typename Scalar>
AccuracyQuantities<Scalar> accuracy_quantities(const RegularisedModel<Scalar>& model,
                                               const Step<Scalar>& s, int q,
                                               const TrustRegionOptions& tr = {}) {
  return accuracy_quantities(model, s, evaluate(model, s), q, tr);
}

}  // namespace iar
