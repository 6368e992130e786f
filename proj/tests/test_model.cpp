#include "iar/model.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace iar;

namespace {

LinearOperator<double> matrix_operator(const Matrix& H) {
  return [H](const Vector& v) { return Vector(H * v); };
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("quadratic model closed forms") {
  const RegularisedModel<double> model(vec({3, 4}), 2.0);
  CHECK(model_value(model, Vector::Zero(2)) == 0.0);
  CHECK(model_value(model, vec({-1.5, -2})) == doctest::Approx(-6.25));
  CHECK(model_gradient(model, vec({-1.5, -2})).isZero(0));
  CHECK(model_gradient(model, Vector::Zero(2)) == vec({3, 4}));
  CHECK(delta_T_f(model, vec({-1.5, -2})) == doctest::Approx(12.5));
  CHECK(delta_T_f(model, Vector::Zero(2)) == 0.0);
  CHECK(phi_model_1(model, vec({-1.5, -2})) == 0.0);
  CHECK(phi_model_1(model, Vector::Zero(2)) == 5.0);
}

TEST_CASE("cubic model value at the scalar stationary point") {
  const RegularisedModel<double> model(vec({1, 0}), matrix_operator(Matrix::Identity(2, 2)), 1.0);
  const double t = std::sqrt(3.0) - 1;
  const double expected = -t + t * t / 2 + t * t * t / 6;
  CHECK(expected == doctest::Approx(-0.39871747423554396).epsilon(1e-15));
  CHECK(model_value(model, vec({-t, 0})) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(model_gradient(model, vec({-t, 0})).norm() <= 1e-14);
  CHECK(model_value(model, Vector::Zero(2)) == 0.0);
}

TEST_CASE("model size and parameter checks") {
  CHECK_THROWS_AS(RegularisedModel<double>(vec({1}), 0.0), ParameterError);
  CHECK_THROWS_AS(RegularisedModel<double>(vec({1}), LinearOperator<double>(), 1.0), ParameterError);
  const RegularisedModel<double> model(vec({1, 2}), 1.0);
  CHECK_THROWS_AS(model_value(model, Vector::Zero(3)), ContractError);
}

TEST_CASE("model gradient matches finite differences and the decrease identity holds") {
  std::mt19937_64 engine(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + static_cast<Index>(uniform_index(engine, 5));
    const Matrix H = oracle::random_symmetric(engine, n);
    const double sigma = 0.1 + uniform_real(engine) * 3;
    const RegularisedModel<double> cubic(oracle::random_vector(engine, n), matrix_operator(H), sigma);
    const RegularisedModel<double> quad(oracle::random_vector(engine, n), sigma);
    for (const auto* model : {&cubic, &quad}) {
      const Vector s = oracle::random_vector(engine, n);
      const Vector fd = oracle::central_gradient([&](const Vector& y) { return model_value(*model, y); }, s);
      CHECK(oracle::relative_error(model_gradient(*model, s), fd) <= 1e-6);
      const double identity = regulariser(*model, s) - model_value(*model, s);
      CHECK(delta_T_f(*model, s) == doctest::Approx(identity).epsilon(1e-12));
      const double expected = model->order == 1 ? -model->gradient.dot(s)
                                                : -model->gradient.dot(s) - 0.5 * s.dot(H * s);
      CHECK(delta_T_f(*model, s) == doctest::Approx(expected).epsilon(1e-10));
      if (model_value(*model, s) <= 0) CHECK(delta_T_f(*model, s) >= regulariser(*model, s) * (1 - 1e-12));
    }
  }
}

TEST_CASE("first-order model measure equals the unit-sphere maximum") {
  std::mt19937_64 engine(32);
  const Matrix H = oracle::random_symmetric(engine, 3);
  const RegularisedModel<double> model(oracle::random_vector(engine, 3), matrix_operator(H), 1.5);
  const Vector s = oracle::random_vector(engine, 3);
  const Vector grad = model_gradient(model, s);
  double best = 0;
  for (int k = 0; k < 10'000; ++k) best = std::max(best, -grad.dot(oracle::random_vector(engine, 3).normalized()));
  CHECK(phi_model_1(model, s) == doctest::Approx(best).epsilon(1e-2));
}

TEST_CASE("model Hessian operator matches differences of the model gradient") {
  std::mt19937_64 engine(33);
  const Matrix H = oracle::random_symmetric(engine, 4);
  const RegularisedModel<double> model(oracle::random_vector(engine, 4), matrix_operator(H), 2.0);
  const Vector s = oracle::random_vector(engine, 4);
  const Vector v = oracle::random_vector(engine, 4);
  const double h = 1e-6;
  const Vector fd = (model_gradient(model, Vector(s + h * v)) - model_gradient(model, Vector(s - h * v))) / (2 * h);
  CHECK(oracle::relative_error(model_hessian_operator(model, s)(v), fd) <= 1e-6);
}

TEST_CASE("accuracy quantities") {
  SUBCASE("exact quadratic minimiser collapses the targets") {
    const RegularisedModel<double> model(vec({3, 4}), 2.0);
    const auto q = accuracy_quantities(model, vec({-1.5, -2}), 1);
    CHECK(q.model_grad_norm == 0.0);
    CHECK(q.delta_T_min == 0.0);
    CHECK(q.target(1, 0.2) == 0.0);
    CHECK(q.target(2, 0.2) == 0.0);
  }
  SUBCASE("short cubic steps use the unit maximiser norm") {
    const RegularisedModel<double> model(vec({1, 0}), matrix_operator(Matrix::Identity(2, 2)), 1.0);
    const auto q = accuracy_quantities(model, vec({-0.5, 0}), 1);
    CHECK(q.tau == 1.0);
    CHECK(q.delta_T_min <= q.delta_T_f);
    const auto q2 = accuracy_quantities(model, vec({-0.5, 0}), 2);
    CHECK(q2.tau == doctest::Approx(1.0));
    CHECK(q2.delta_T_min <= q2.delta_T_f);
    CHECK(q2.delta_T_min <= q2.model_grad_norm);
    const auto long_step = accuracy_quantities(model, vec({-2, 0}), 1);
    CHECK(long_step.tau == 2.0);
    CHECK_THROWS_AS(accuracy_quantities(RegularisedModel<double>(vec({1}), 1.0), vec({0}), 2), ParameterError);
  }
  SUBCASE("targets by direct substitution") {
    AccuracyQuantities<double> q;
    q.delta_T_min = 0.6;
    q.tau = 2;
    CHECK(q.target(1, 0.2) == doctest::Approx(0.01));
    CHECK(q.target(2, 0.2) == doctest::Approx(0.005));
  }
}
