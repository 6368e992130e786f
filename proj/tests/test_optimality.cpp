#include "iar/optimality.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <array>
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

Matrix diag(std::initializer_list<double> values) { return vec(values).asDiagonal(); }

double objective(const Vector& g, const Matrix& H, const Vector& d) { return -g.dot(d) - 0.5 * d.dot(H * d); }

}  // namespace

TEST_CASE("first-order measure") {
  CHECK(phi_1(vec({3, 4})) == 5.0);
  CHECK(phi_1(Vector::Zero(3)) == 0.0);
  std::mt19937_64 engine(41);
  const Vector g = oracle::random_vector(engine, 4);
  double best = 0;
  for (int k = 0; k < 10'000; ++k) best = std::max(best, -g.dot(oracle::random_vector(engine, 4).normalized()));
  CHECK(phi_1(g) == doctest::Approx(best).epsilon(1e-2));
}

TEST_CASE("second-order measure analytic cases") {
  const auto saddle = phi_2<double>(Vector::Zero(2), matrix_operator(diag({-2, 1})));
  CHECK(saddle.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(saddle.maximiser[0]) == doctest::Approx(1.0));
  CHECK(saddle.on_boundary);

  const auto psd = phi_2<double>(Vector::Zero(3), matrix_operator(diag({0, 1, 2})));
  CHECK(psd.value == 0.0);

  const auto tilted = phi_2<double>(vec({1, 0}), matrix_operator(diag({-2, 1})));
  CHECK(tilted.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(tilted.maximiser[0] == doctest::Approx(-1.0));
  CHECK(oracle::trust_region_grid_2d(vec({1, 0}), diag({-2, 1})) == doctest::Approx(2.0).epsilon(1e-6));

  const auto interior = phi_2<double>(vec({0.5, 0}), matrix_operator(diag({2, 4})));
  CHECK(interior.value == doctest::Approx(0.0625));
  CHECK_FALSE(interior.on_boundary);
  CHECK(interior.maximiser[0] == doctest::Approx(-0.25));
}

TEST_CASE("second-order measure certificates on random instances") {
  std::mt19937_64 engine(42);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 1 + static_cast<Index>(uniform_index(engine, 8));
    const Matrix H = oracle::random_symmetric(engine, n);
    const Vector g = oracle::random_vector(engine, n, trial % 3 == 0 ? 1e-3 : 1.0);
    const auto r = phi_2<double>(g, matrix_operator(H));
    CHECK(r.value >= 0);
    CHECK(r.maximiser.norm() <= 1 + 1e-10);
    CHECK(objective(g, H, r.maximiser) == doctest::Approx(r.value).epsilon(1e-10));
    CHECK(r.multiplier >= -1e-12);
    for (int k = 0; k < 1000; ++k) {
      const Vector d = oracle::random_vector(engine, n).normalized() * uniform_real(engine);
      CHECK(objective(g, H, d) <= r.value + 1e-10);
    }
  }
}

TEST_CASE("hard case is completed along the leftmost eigenvector") {
  // g orthogonal to the leftmost eigenvector, small enough that the
  // pseudo-inverse step is interior.
  const Matrix H = diag({-1, 2, 3});
  const Vector g = vec({0, 0.3, 0});
  const auto r = phi_2<double>(g, matrix_operator(H));
  CHECK(r.on_boundary);
  CHECK(r.multiplier == doctest::Approx(1.0));
  CHECK(r.maximiser.norm() == doctest::Approx(1.0));
  // d = (+-sqrt(1 - 0.01), -0.1, 0): value = 0.03 + 0.5 (0.99 - 0.02)
  CHECK(r.value == doctest::Approx(0.03 + 0.5 * (0.99 - 2 * 0.01)).epsilon(1e-12));
}

TEST_CASE("dense and Krylov paths agree") {
  std::mt19937_64 engine(43);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 50;
    const Matrix H = oracle::random_symmetric(engine, n, 0.2);
    const Vector g = oracle::random_vector(engine, n, trial == 0 ? 0.0 : 0.3);
    TrustRegionOptions dense;
    TrustRegionOptions krylov;
    krylov.dense_threshold = 10;
    const auto a = phi_2<double>(g, matrix_operator(H), dense);
    const auto b = phi_2<double>(g, matrix_operator(H), krylov);
    CHECK(std::abs(a.value - b.value) <= 2e-3);
  }
}

TEST_CASE("asymmetric operators are rejected") {
  Matrix H = diag({1, 2});
  H(0, 1) = 1;
  CHECK_THROWS_AS(phi_2<double>(vec({1, 1}), matrix_operator(H)), ContractError);
  TrustRegionOptions krylov;
  krylov.dense_threshold = 1;
  CHECK_THROWS_AS(phi_2<double>(vec({1, 1}), matrix_operator(H), krylov), ContractError);
}

TEST_CASE("termination test") {
  const std::array<double, 2> phi_a{9e-4, 0}, eps_a{1e-3, 0};
  CHECK(check_termination<double>(phi_a, eps_a, 1));
  const std::array<double, 2> phi_b{0, 0.6}, eps_b{1e-3, 1.0};
  CHECK_FALSE(check_termination<double>(phi_b, eps_b, 2));
  const std::array<double, 2> phi_c{1e-3, 0.5}, eps_c{1e-3, 1.0};
  CHECK(check_termination<double>(phi_c, eps_c, 2));
  const std::array<double, 2> zero{0, 0}, tiny{1e-300, 0};
  CHECK(check_termination<double>(zero, zero, 2));
  CHECK_FALSE(check_termination<double>(tiny, zero, 1));
  CHECK_THROWS_AS(check_termination<double>(zero, zero, 3), ParameterError);
}

TEST_CASE("templated on the scalar type") {
  Eigen::VectorXf g(2);
  g << 1, 0;
  Eigen::MatrixXf H = Eigen::Vector2f(-2, 1).asDiagonal();
  const auto r = dense_trust_region<float>(g, H);
  CHECK(r.value == doctest::Approx(2.0f).epsilon(1e-5));
  const auto rl = dense_trust_region<long double>(g.cast<long double>(), H.cast<long double>());
  CHECK(static_cast<double>(rl.value) == doctest::Approx(2.0).epsilon(1e-15));
}
