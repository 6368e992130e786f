#include "iar/solver.hpp"

#include "iar/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace iar {

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw ParameterError("solver config: " + what); };
  if (p != 1 && p != 2) fail("p must be 1 or 2");
  if (q != 1 && q != 2) fail("q must be 1 or 2");
  if (q > p) fail("q must not exceed p");
  if (!(sigma0 > 0)) fail("sigma0 must be positive");
  if (!(sigma_min > 0 && sigma_min < sigma0)) fail("sigma_min must lie in (0, sigma0)");
  if (!(eps1 >= 0)) fail("eps1 must be non-negative");
  if (q == 2 && !(eps2 > 0)) fail("eps2 must be positive when q = 2");
  if (!(theta > 0 && theta <= 0.5)) fail("theta must lie in (0, 0.5]");
  if (!(eta > 0 && eta < 1)) fail("eta must lie in (0, 1)");
  if (!(gamma > 1)) fail("gamma must exceed 1");
  if (!(alpha > 0 && alpha < 1)) fail("alpha must lie in (0, 1)");
  if (!(kappa_eps > 0)) fail("kappa_eps must be positive");
  if (!(gamma_eps > 0 && gamma_eps < 1)) fail("gamma_eps must lie in (0, 1)");
  if (!(kappa > 0)) fail("kappa must be positive");
  if (!(t > 0 && t < 1)) fail("t must lie in (0, 1)");
  if (!(budget_cm > 0)) fail("budget_cm must be positive");
  if (max_iterations < 1) fail("max_iterations must be positive");
  if (!(subproblem_eps1 > 0)) fail("subproblem_eps1 must be positive");
  bb.validate();
}

double relative_accuracy(const SolverConfig& config, double sigma) {
  return std::min(0.5 * config.alpha * config.eta, 1.0 / sigma);
}

double update_sigma(const SolverConfig& config, double sigma, bool successful) {
  return successful ? std::max(config.sigma_min, sigma / config.gamma) : config.gamma * sigma;
}

double rho(double f_x, double f_xs, double delta_T) {
  if (delta_T > 0) return (f_x - f_xs) / delta_T;
  return -std::numeric_limits<double>::infinity();
}

std::uint64_t IterationWork::units() const {
  const auto u = [](Index v) { return static_cast<std::uint64_t>(v); };
  return u(d1) + u(d2) + 2 * u(g - g_and_d1) + u(g_and_d1) + 2 * u(h) * u(hessian_products) +
         u(h_minus_g) + discarded;
}

namespace {

Index intersection_size(const IndexSet& a, const IndexSet& b) {
  Index count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

Index size_of(const IndexSet& s) { return static_cast<Index>(s.size()); }

std::uint64_t attempt_units(const IndexSet& g, const IndexSet& h, Index products) {
  const auto gs = static_cast<std::uint64_t>(g.size());
  const auto hs = static_cast<std::uint64_t>(h.size());
  const auto shared = static_cast<std::uint64_t>(intersection_size(g, h));
  return 2 * gs + (hs - shared) + 2 * hs * static_cast<std::uint64_t>(products);
}

}  // namespace

IterationWork iteration_work(const IndexSet& d1, const IndexSet& d2, const IndexSet& g,
                             const IndexSet& h, Index hessian_products) {
  IterationWork w;
  w.d1 = size_of(d1);
  w.d2 = size_of(d2);
  w.g = size_of(g);
  w.h = size_of(h);
  w.g_and_d1 = intersection_size(g, d1);
  w.h_minus_g = w.h - intersection_size(h, g);
  w.hessian_products = hessian_products;
  return w;
}

CostMeter::CostMeter(Index components) : components_(components) {
  if (components < 1) throw ParameterError("CostMeter: component count must be positive");
}

double charge_costs(CostMeter& meter, const IterationWork& work) {
  meter.charge(work.units());
  return meter.cm();
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::converged:
      return "converged";
    case StopReason::budget:
      return "budget";
    case StopReason::iteration_cap:
      return "iteration_cap";
  }
  return "unknown";
}

GradientEstimate inner_loop_iar1(const FiniteSumProblem& problem, const Vector& x, double omega,
                                 const SolverConfig& config, std::mt19937_64& engine) {
  const Index N = problem.size();
  const Index n = problem.dimension();
  GradientEstimate out;
  double target = config.kappa_eps;
  while (true) {
    ++out.attempts;
    const Index m = sample_size_for(SampleOrder::gradient, config.kappa, target, config.t, n, N);
    IndexSet sample = draw_subsample(engine, N, m);
    Vector g = estimate_gradient(problem, sample, x);
    const bool full = m == N;
    if (full || target <= omega * g.norm()) {
      out.gradient = std::move(g);
      out.indices = std::move(sample);
      out.accuracy = full ? 0.0 : target;
      return out;
    }
    out.discarded += 2 * static_cast<std::uint64_t>(m);
    target *= config.gamma_eps;
  }
}

CubicModelStep inner_loop_iar2(const FiniteSumProblem& problem, const Vector& x, double sigma,
                               double omega, const SolverConfig& config,
                               std::mt19937_64& engine) {
  const Index N = problem.size();
  const Index n = problem.dimension();
  const double tolerance1 = config.theta * (config.eps1 > 0 ? config.eps1 : config.subproblem_eps1);
  const double tolerance2 = config.theta * config.eps2 / 2;

  CubicModelStep out;
  double target_g = config.kappa_eps;
  double target_h = config.kappa_eps;
  while (true) {
    ++out.attempts;
    const Index mg = sample_size_for(SampleOrder::gradient, config.kappa, target_g, config.t, n, N);
    IndexSet g_sample = draw_subsample(engine, N, mg);
    Vector g = estimate_gradient(problem, g_sample, x);

    const Index mh = sample_size_for(SampleOrder::hessian, config.kappa, target_h, config.t, n, N);
    IndexSet h_sample = draw_subsample(engine, N, mh);
    SubsampledHessian hessian = h_sample == g_sample
                                    ? SubsampledHessian(problem, h_sample, x, g)
                                    : SubsampledHessian(problem, h_sample, x);
    const RegularisedModel<double> model(g, hessian.as_operator(), sigma);

    StepResult<double> step =
        config.q == 2
            ? cubic_step_second_order(model, config.bb, tolerance1, tolerance2, config.trust_region)
            : cubic_step(model, config.bb, tolerance1);
    const auto quantities =
        accuracy_quantities(model, step.step, step.at_step, config.q, config.trust_region);

    const double achieved_g = mg == N ? 0.0 : target_g;
    const double achieved_h = mh == N ? 0.0 : target_h;
    const bool accurate =
        achieved_g <= quantities.target(1, omega) && achieved_h <= quantities.target(2, omega);

    if (accurate) {
      if (config.q == 2) {
        out.phi2_at_x = phi_2<double>(g, hessian.as_operator(), config.trust_region).value;
      }
      out.gradient = std::move(g);
      out.g_indices = std::move(g_sample);
      out.h_indices = hessian.indices();
      out.step = std::move(step);
      out.quantities = quantities;
      out.hessian_products = hessian.products();
      return out;
    }
    out.discarded += attempt_units(g_sample, hessian.indices(), hessian.products());
    target_g *= config.gamma_eps;
    target_h *= config.gamma_eps;
  }
}

SolverResult run(const FiniteSumProblem& problem, const SolverConfig& config, const Vector& x0,
                 const RunOptions& options) {
  config.validate();
  detail::require_size(x0.size(), problem.dimension(), "run: x0");
  const Index N = problem.size();
  const Index n = problem.dimension();

  std::mt19937_64 engine(config.seed);
  CostMeter meter(N);
  SolverResult result;
  Vector x = x0;
  double sigma = config.sigma0;
  double omega = relative_accuracy(config, sigma);
  Index zero_decrease = 0;
  if (options.record_iterates) result.iterates.push_back(x);

  for (Index k = 0;; ++k) {
    if (k >= config.max_iterations) {
      result.stop = StopReason::iteration_cap;
      break;
    }
    if (meter.cm() >= config.budget_cm) {
      result.stop = StopReason::budget;
      break;
    }

    TraceEvent event;
    event.k = k;
    event.sigma = sigma;
    event.omega = omega;
    IndexSet g_set, h_set, d1, d2;
    Index products = 0;
    std::uint64_t discarded = 0;
    Vector step;
    double delta_T = 0.0;
    bool converged = false;

    try {
      if (config.p == 1) {
        GradientEstimate est = inner_loop_iar1(problem, x, omega, config, engine);
        event.inner_attempts = est.attempts;
        event.grad_norm = est.gradient.norm();
        discarded = est.discarded;
        g_set = std::move(est.indices);
        converged = config.eps1 > 0 && event.grad_norm <= config.eps1;
        if (!converged) {
          auto quad = quadratic_step<double>(est.gradient, sigma);
          step = std::move(quad.step);
          delta_T = quad.delta_T_f;
        }
      } else {
        CubicModelStep ms = inner_loop_iar2(problem, x, sigma, omega, config, engine);
        event.inner_attempts = ms.attempts;
        event.grad_norm = ms.gradient.norm();
        discarded = ms.discarded;
        products = ms.hessian_products;
        g_set = std::move(ms.g_indices);
        h_set = std::move(ms.h_indices);
        converged = config.eps1 > 0 && event.grad_norm <= config.eps1 &&
                    (config.q == 1 || ms.phi2_at_x <= config.eps2 / 2);
        step = std::move(ms.step.step);
        delta_T = ms.step.delta_T_f;
      }

      if (!converged) {
        if (delta_T > 0) {
          zero_decrease = 0;
          const Index md = sample_size_for(SampleOrder::value, config.kappa, omega * delta_T,
                                           config.t, n, N);
          d1 = draw_subsample(engine, N, md);
          d2 = draw_subsample(engine, N, md);
          const double f_x = estimate_value(problem, d1, x);
          const Vector trial = x + step;
          const double f_xs = estimate_value(problem, d2, trial);
          event.train_loss_estimate = f_x;
          event.rho = rho(f_x, f_xs, delta_T);
        } else {
          event.rho = rho(0.0, 0.0, delta_T);
          if (static_cast<Index>(g_set.size()) == N && ++zero_decrease >= config.max_zero_decrease) {
            throw SolverError(k, "predicted decrease vanished at the full sample for " +
                                     std::to_string(zero_decrease) + " consecutive iterations");
          }
        }
      }
    } catch (const SolverError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError(k, e.what());
    }

    event.delta_T = delta_T;
    event.work = iteration_work(d1, d2, g_set, h_set, products);
    event.work.discarded = discarded;

    if (converged) {
      event.terminal = true;
      event.rho = std::numeric_limits<double>::quiet_NaN();
    } else {
      event.success = event.rho >= config.eta;
      event.step_norm = step.norm();
      if (event.success) {
        x += step;
        ++result.successful;
      }
      sigma = update_sigma(config, sigma, event.success);
      omega = relative_accuracy(config, sigma);
    }
    event.cm = charge_costs(meter, event.work);

    if (options.monitor) options.monitor(x, event);
    if (options.sink) options.sink(event);
    result.trace.push_back(event);
    if (options.record_iterates && !converged) result.iterates.push_back(x);
    result.iterations = k + 1;

    if (converged) {
      result.stop = StopReason::converged;
      break;
    }
  }

  result.x = std::move(x);
  result.cm = meter.cm();
  return result;
}

}  // namespace iar
