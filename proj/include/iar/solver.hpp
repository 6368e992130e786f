#pragma once

#include "iar/common.hpp"
#include "iar/finite_sum.hpp"
#include "iar/model.hpp"
#include "iar/optimality.hpp"
#include "iar/subproblem.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace iar {

/// Parameters of the inexact adaptive regularisation method IAR_qp.
///
/// Defaults follow the published experimental setup (sigma_0 = 0.1,
/// sigma_min = 1e-5, alpha = 0.5, eta = 0.8, gamma = 2, theta = 0.5,
/// eps_1 = 1e-3, kappa_eps = gamma_eps = 0.5, t = 0.2).
struct SolverConfig {
  int q = 1;
  int p = 1;
  double sigma0 = 0.1;
  double sigma_min = 1e-5;
  double eps1 = 1e-3;  // 0 disables the first-order stopping test
  double eps2 = 0.0;   // used when q == 2
  double theta = 0.5;
  double eta = 0.8;
  double gamma = 2.0;
  double alpha = 0.5;
  double kappa_eps = 0.5;
  double gamma_eps = 0.5;
  double kappa = 3e-2;  // Bernstein bound constant for all orders
  double t = 0.2;
  double budget_cm = std::numeric_limits<double>::infinity();
  Index max_iterations = 1'000'000;
  std::uint64_t seed = 1;

  /// eps_1 used for the subproblem tolerance theta * eps_1 when eps1 == 0.
  double subproblem_eps1 = 1e-3;
  /// Consecutive full-sample iterations with zero predicted decrease before aborting.
  Index max_zero_decrease = 60;
  BBConfig bb;
  TrustRegionOptions trust_region;

  void validate() const;
};

/// omega = min(alpha * eta / 2, 1 / sigma).
double relative_accuracy(const SolverConfig& config, double sigma);

/// sigma update: max(sigma_min, sigma / gamma) on success, gamma * sigma otherwise.
double update_sigma(const SolverConfig& config, double sigma, bool successful);

/// (f_x - f_xs) / Delta T when Delta T > 0, -infinity otherwise.
double rho(double f_x, double f_xs, double delta_T);

/// Work of one outer iteration in forward/backward propagation units.
///
/// One unit is one component forward pass; N units make one cost measure.
struct IterationWork {
  Index d1 = 0;               // |D_k1|
  Index d2 = 0;               // |D_k2|
  Index g = 0;                // |G_k|
  Index h = 0;                // |H_k|
  Index g_and_d1 = 0;         // |G_k & D_k1|
  Index h_minus_g = 0;        // |H_k \ G_k|
  Index hessian_products = 0;
  std::uint64_t discarded = 0;  // rejected inner-loop attempts

  /// d1 + d2 + 2|G \ D1| + |G & D1| + 2 |H| products + |H \ G| + discarded.
  std::uint64_t units() const;
};

/// Fills the overlap counts of an iteration from its index sets.
IterationWork iteration_work(const IndexSet& d1, const IndexSet& d2, const IndexSet& g,
                             const IndexSet& h, Index hessian_products);

class CostMeter {
 public:
  explicit CostMeter(Index components);
  void charge(std::uint64_t units) { units_ += units; }
  std::uint64_t units() const { return units_; }
  double cm() const { return static_cast<double>(units_) / static_cast<double>(components_); }

 private:
  Index components_;
  std::uint64_t units_ = 0;
};

/// Adds one iteration's work to the meter and returns the new total in CM.
double charge_costs(CostMeter& meter, const IterationWork& work);

/// One record per outer iteration. sigma and omega are the values used by the
/// iteration; cm is cumulative after charging it.
struct TraceEvent {
  Index k = 0;
  double cm = 0.0;
  double sigma = 0.0;
  double omega = 0.0;
  double grad_norm = 0.0;
  double delta_T = 0.0;
  double rho = 0.0;
  bool success = false;
  bool terminal = false;  // stopping test passed; no step was taken
  double step_norm = 0.0;
  Index inner_attempts = 0;
  IterationWork work;
  double train_loss_estimate = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> train_loss;  // exact, measured at the next iterate
  std::optional<double> test_loss;
};

enum class StopReason { converged, budget, iteration_cap };
std::string to_string(StopReason reason);

struct RunOptions {
  /// Called with every event after the monitor.
  std::function<void(const TraceEvent&)> sink;
  /// Fills the exact losses of an event from the next iterate; never charged.
  std::function<void(const Vector& x, TraceEvent& event)> monitor;
  bool record_iterates = false;
};

struct SolverResult {
  Vector x;
  std::vector<TraceEvent> trace;
  std::vector<Vector> iterates;  // x_0, x_1, ... when requested
  StopReason stop = StopReason::iteration_cap;
  double cm = 0.0;
  Index iterations = 0;
  Index successful = 0;
};

/// Raised when the solver cannot continue; carries the iteration number.
class SolverError : public std::runtime_error {
 public:
  SolverError(Index iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  Index iteration() const { return iteration_; }

 private:
  Index iteration_;
};

/// Gradient estimate accepted by the first-order inner loop.
struct GradientEstimate {
  Vector gradient;
  IndexSet indices;
  double accuracy = 0.0;  // target it was sized for; 0 for the full sample
  Index attempts = 0;
  std::uint64_t discarded = 0;
};

/// Practical accuracy loop for p = 1: shrink the target accuracy eps by
/// gamma_eps from kappa_eps until eps <= omega |g| or the sample is full.
GradientEstimate inner_loop_iar1(const FiniteSumProblem& problem, const Vector& x, double omega,
                                 const SolverConfig& config, std::mt19937_64& engine);

/// Model, step and derivative samples accepted by the p = 2 inner loop.
struct CubicModelStep {
  Vector gradient;
  IndexSet g_indices;
  IndexSet h_indices;
  StepResult<double> step;
  AccuracyQuantities<double> quantities;
  double phi2_at_x = 0.0;  // phi_2 of the inexact Taylor model at x (q = 2)
  Index hessian_products = 0;
  Index attempts = 0;
  std::uint64_t discarded = 0;
};

/// Accuracy loop for p = 2: sample gradient and Hessian for the current
/// targets, solve the cubic subproblem, and accept once both achieved targets
/// meet nu_l = omega Delta T_min / (6 tau^l); otherwise shrink both by gamma_eps.
CubicModelStep inner_loop_iar2(const FiniteSumProblem& problem, const Vector& x, double sigma,
                               double omega, const SolverConfig& config,
                               std::mt19937_64& engine);

/// Runs IAR_qp from x0 until convergence, the cost budget or the iteration cap.
SolverResult run(const FiniteSumProblem& problem, const SolverConfig& config, const Vector& x0,
                 const RunOptions& options = {});

}  // namespace iar
