#pragma once

#include "iar/common.hpp"
#include "iar/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace iar {

/// Maximiser of -g^T d - 1/2 d^T H d over the unit ball.
template <typename Scalar>
struct TrustRegionResult {
  VectorX<Scalar> maximiser;
  Scalar value = 0;       // phi_2 >= 0
  Scalar multiplier = 0;  // mu >= max(0, -lambda_min)
  bool on_boundary = false;
};

struct TrustRegionOptions {
  /// Above this dimension the operator is projected onto a Krylov subspace.
  Index dense_threshold = 200;
  /// Krylov steps from g and from the seeded random start (iterative path).
  Index krylov_steps = 100;
  /// Accepted relative asymmetry of the operator.
  double symmetry_tolerance = 1e-4;
  /// Relative residual of the leftmost Ritz pair before stagnation is reported.
  double eigen_residual_tolerance = 1e-3;
  std::uint64_t seed = 0x1a2b3c4d5e6fULL;
};

/// phi_1 = max over |d| <= 1 of -g^T d = |g|.
template <typename Derived>
typename Derived::Scalar phi_1(const Eigen::MatrixBase<Derived>& g) {
  return g.norm();
}

/// True iff phi_j <= eps_j / j for j = 1..q.
template <typename Scalar>
bool check_termination(std::span<const Scalar> phi, std::span<const Scalar> eps, int q) {
  if (q < 1 || q > 2 || static_cast<int>(phi.size()) < q || static_cast<int>(eps.size()) < q) {
    throw ParameterError("check_termination: q must be 1 or 2 with matching measures");
  }
  for (int j = 1; j <= q; ++j) {
    if (phi[j - 1] > eps[j - 1] / static_cast<Scalar>(j)) return false;
  }
  return true;
}

/// Unit-ball trust-region subproblem for an explicit symmetric matrix.
///
/// Minimises g^T d + 1/2 d^T H d with |d| <= 1 through the eigendecomposition
/// of H: interior Newton point when H > 0 and it is feasible, otherwise the
/// boundary multiplier from the secular equation 1/|d(mu)| = 1 (safeguarded
/// Newton with bisection), or the hard case completed along the leftmost
/// eigenvector.
template <typename Scalar>
TrustRegionResult<Scalar> dense_trust_region(const VectorX<Scalar>& g, const MatrixX<Scalar>& H) {
  using std::abs;
  using std::sqrt;
  const Index n = g.size();
  detail::require(H.rows() == n && H.cols() == n, "dense_trust_region: H must be n x n");
  TrustRegionResult<Scalar> out;
  if (n == 0) {
    out.maximiser = VectorX<Scalar>();
    return out;
  }

  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(H);
  if (eig.info() != Eigen::Success) throw NumericalError("dense_trust_region: eigensolver failed");
  const VectorX<Scalar>& lambda = eig.eigenvalues();  // ascending
  const MatrixX<Scalar>& Q = eig.eigenvectors();
  const VectorX<Scalar> c = Q.transpose() * g;
  const Scalar lambda_min = lambda[0];
  const Scalar scale = std::max<Scalar>(lambda.cwiseAbs().maxCoeff(), Scalar(1));
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  auto step_coords = [&](Scalar mu) {
    VectorX<Scalar> y(n);
    for (Index i = 0; i < n; ++i) y[i] = -c[i] / (lambda[i] + mu);
    return y;
  };
  auto finish = [&](const VectorX<Scalar>& y, Scalar mu, bool boundary) {
    out.maximiser = Q * y;
    const Scalar model = g.dot(out.maximiser) + Scalar(0.5) * out.maximiser.dot(H * out.maximiser);
    out.value = std::max<Scalar>(Scalar(0), -model);
    out.multiplier = mu;
    out.on_boundary = boundary;
    return out;
  };

  if (lambda_min > 0) {
    const VectorX<Scalar> y = step_coords(Scalar(0));
    if (y.norm() <= Scalar(1)) return finish(y, Scalar(0), false);
  }

  const Scalar mu_low = std::max<Scalar>(Scalar(0), -lambda_min);

  // Hard case: g has no component along the leftmost eigenspace and the
  // pseudo-inverse step at mu_low stays inside the ball.
  const Scalar cluster = Scalar(1e3) * eps * scale;
  Scalar leftmost_weight = 0;
  for (Index i = 0; i < n && lambda[i] - lambda_min <= cluster; ++i) leftmost_weight += c[i] * c[i];
  if (sqrt(leftmost_weight) <= Scalar(1e3) * eps * std::max<Scalar>(g.norm(), scale)) {
    VectorX<Scalar> y = VectorX<Scalar>::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (lambda[i] - lambda_min > cluster) y[i] = -c[i] / (lambda[i] + mu_low);
    }
    const Scalar norm2 = y.squaredNorm();
    if (norm2 <= Scalar(1)) {
      y[0] += sqrt(Scalar(1) - norm2);
      return finish(y, mu_low, true);
    }
  }

  // Secular equation psi(mu) = 1/|d(mu)| - 1 on (mu_low, mu_low + |g|].
  Scalar lo = mu_low;
  Scalar hi = mu_low + g.norm() + eps * scale;
  Scalar mu = hi;
  for (int it = 0; it < 200; ++it) {
    Scalar norm2 = 0, deriv = 0;
    for (Index i = 0; i < n; ++i) {
      const Scalar denom = lambda[i] + mu;
      norm2 += c[i] * c[i] / (denom * denom);
      deriv += c[i] * c[i] / (denom * denom * denom);
    }
    const Scalar norm = sqrt(norm2);
    const Scalar psi = Scalar(1) / norm - Scalar(1);
    if (abs(psi) <= Scalar(4) * eps) break;
    if (psi < 0) lo = mu; else hi = mu;
    // d psi / d mu = (sum c^2/(lambda+mu)^3) / |d|^3
    const Scalar slope = deriv / (norm2 * norm);
    Scalar next = mu - psi / slope;
    if (!(next > lo && next < hi)) next = Scalar(0.5) * (lo + hi);
    if (hi - lo <= Scalar(4) * eps * std::max<Scalar>(Scalar(1), hi)) { mu = next; break; }
    mu = next;
  }
  VectorX<Scalar> y = step_coords(mu);
  const Scalar norm = y.norm();
  if (norm > Scalar(0)) y /= norm;
  return finish(y, mu, true);
}

namespace detail {

/// Orthonormal basis V and H V grown by Gram-Schmidt (applied twice) from
/// each start vector in turn, `steps` directions per start at most.
template <typename Scalar>
void grow_krylov_basis(const LinearOperator<Scalar>& H, VectorX<Scalar> start, Index steps,
                       std::vector<VectorX<Scalar>>& basis,
                       std::vector<VectorX<Scalar>>& images) {
  const Index n = start.size();
  VectorX<Scalar> v = std::move(start);
  for (Index k = 0; k < steps && static_cast<Index>(basis.size()) < n; ++k) {
    const Scalar original = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) v -= b.dot(v) * b;
    }
    const Scalar norm = v.norm();
    if (!(norm > Scalar(1e-10) * std::max<Scalar>(original, Scalar(1e-300)))) return;
    v /= norm;
    VectorX<Scalar> hv = H(v);
    if (!hv.allFinite()) throw NumericalError("phi_2: non-finite Hessian action");
    basis.push_back(v);
    images.push_back(hv);
    v = hv;
  }
}

template <typename Scalar>
MatrixX<Scalar> materialise(const LinearOperator<Scalar>& H, Index n) {
  MatrixX<Scalar> M(n, n);
  for (Index j = 0; j < n; ++j) {
    VectorX<Scalar> e = VectorX<Scalar>::Unit(n, j);
    M.col(j) = H(e);
  }
  if (!M.allFinite()) throw NumericalError("phi_2: non-finite Hessian action");
  return M;
}

}  // namespace detail

/// Second-order optimality measure phi_2 = max_{|d|<=1} -g^T d - 1/2 d^T H d.
///
/// Small problems materialise H column by column and call
/// dense_trust_region. Larger ones build a Krylov subspace from g and from a
/// seeded random vector (the latter resolves the leftmost eigenpair and the
/// hard case), then solve the projected problem densely.
template <typename Scalar>
TrustRegionResult<Scalar> phi_2(const VectorX<Scalar>& g, const LinearOperator<Scalar>& H,
                                const TrustRegionOptions& options = {}) {
  const Index n = g.size();
  if (n == 0) throw ContractError("phi_2: empty gradient");

  if (n <= options.dense_threshold) {
    MatrixX<Scalar> M = detail::materialise(H, n);
    const MatrixX<Scalar> asym = M - M.transpose();
    if (asym.norm() > Scalar(options.symmetry_tolerance) * M.norm() + Scalar(1e-8)) {
      throw ContractError("phi_2: Hessian operator is not symmetric (relative asymmetry " +
                          std::to_string(double(asym.norm() / std::max<Scalar>(M.norm(), Scalar(1e-300)))) + ")");
    }
    M = Scalar(0.5) * (M + M.transpose());
    return dense_trust_region<Scalar>(g, M);
  }

  std::mt19937_64 engine(options.seed);
  VectorX<Scalar> probe(n), other(n);
  for (Index i = 0; i < n; ++i) probe[i] = Scalar(standard_normal(engine));
  for (Index i = 0; i < n; ++i) other[i] = Scalar(standard_normal(engine));

  {
    const VectorX<Scalar> hp = H(probe), ho = H(other);
    const Scalar lhs = other.dot(hp), rhs = probe.dot(ho);
    const Scalar mag = probe.norm() * ho.norm() + other.norm() * hp.norm();
    if (std::abs(lhs - rhs) > Scalar(options.symmetry_tolerance) * mag + Scalar(1e-8)) {
      throw ContractError("phi_2: Hessian operator is not symmetric");
    }
  }

  std::vector<VectorX<Scalar>> basis, images;
  if (g.norm() > Scalar(0)) detail::grow_krylov_basis<Scalar>(H, g, options.krylov_steps, basis, images);
  detail::grow_krylov_basis<Scalar>(H, probe, options.krylov_steps, basis, images);

  const Index m = static_cast<Index>(basis.size());
  MatrixX<Scalar> W(n, m), HW(n, m);
  for (Index j = 0; j < m; ++j) {
    W.col(j) = basis[static_cast<std::size_t>(j)];
    HW.col(j) = images[static_cast<std::size_t>(j)];
  }
  MatrixX<Scalar> T = W.transpose() * HW;
  T = Scalar(0.5) * (T + T.transpose());

  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> ritz(T);
  if (ritz.info() != Eigen::Success) throw NumericalError("phi_2: projected eigensolver failed");
  const Scalar theta = ritz.eigenvalues()[0];
  const VectorX<Scalar> y = ritz.eigenvectors().col(0);
  const Scalar residual = (HW * y - theta * (W * y)).norm();
  const Scalar spread = std::max<Scalar>(ritz.eigenvalues().cwiseAbs().maxCoeff(), Scalar(1e-12));
  if (residual > Scalar(options.eigen_residual_tolerance) * spread) {
    throw NumericalError("phi_2: leftmost eigenpair did not converge (relative residual " +
                         std::to_string(double(residual / spread)) + " after " +
                         std::to_string(m) + " Krylov vectors)");
  }

  const VectorX<Scalar> reduced_g = W.transpose() * g;
  TrustRegionResult<Scalar> reduced = dense_trust_region<Scalar>(reduced_g, T);
  reduced.maximiser = W * reduced.maximiser;
  return reduced;
}

}  // namespace iar
