#include "ctsg/solver.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <string>

#include "ctsg/errors.hpp"
#include "ctsg/parallel.hpp"

namespace ctsg {

double stopping_threshold(double epsilon, double theta, double norm_r, double norm_q, double T) {
  if (!(epsilon > 0.0) || !(theta > 0.0) || !(T > 0.0) || !(norm_r >= 0.0) || !(norm_q >= 0.0))
    throw PreconditionError("stopping_threshold: epsilon, theta, T must be positive and norms nonnegative");
  if (norm_r == 0.0) {
    std::clog << "ctsg: warning: degenerate: zero payoff norm; using limit-form stopping threshold\n";
    return epsilon / (2.0 * std::exp(2.0 * norm_q * T) * (1.0 + 2.0 * norm_q * T * theta));
  }
  const double tr = theta * norm_r;
  return epsilon / (2.0 * std::exp((tr + 2.0 * norm_q) * T) * (1.0 + 2.0 * norm_q / tr));
}

ContractionConstants contraction_constants(double theta, double norm_r, double norm_q, double T) {
  if (!(T > 0.0)) throw PreconditionError("contraction_constants: T must be positive");
  ContractionConstants c;
  c.l_tilde = theta * norm_r + 2.0 * norm_q;
  const double lt = c.l_tilde * T;
  double term = lt;
  int k = 1;
  while (!(term < 1.0)) {
    ++k;
    term *= lt / k;
  }
  c.k = k;
  c.beta = term;
  return c;
}

SolveResult solve(const GameModel& model, const SolverConfig& config,
                  const std::optional<ValueGrid>& v0) {
  const auto start = std::chrono::steady_clock::now();
  const ValidationReport validation = validate_generator(model);
  if (!validation.ok())
    throw PreconditionError("solve: model fails generator validation (" +
                            std::to_string(validation.violations.size()) + " violations)");
  if (config.max_iterations < 1) throw PreconditionError("solve: max_iterations must be >= 1");

  const TimeGrid grid(model.horizon, config.n_t);
  const ShapleyOperator gamma(model, resolve_threads(config.threads));

  SolveResult result;
  SolverReport& report = result.report;
  report.norm_r = model.payoff_norm();
  report.norm_q = model.rate_norm();
  report.degenerate_payoff_norm = report.norm_r == 0.0;
  report.threshold =
      stopping_threshold(config.epsilon, model.theta, report.norm_r, report.norm_q, model.horizon);
  report.contraction =
      contraction_constants(model.theta, report.norm_r, report.norm_q, model.horizon);

  ValueGrid v;
  if (v0) {
    if (!(v0->grid == grid) || v0->num_states() != model.num_states())
      throw DimensionError("solve: initial value grid does not match model and n_t");
    v = *v0;
  } else {
    v = ValueGrid(grid, model.num_states());
    for (std::size_t i = 0; i < grid.num_nodes(); ++i)
      for (std::size_t x = 0; x < model.num_states(); ++x) v(i, x) = gamma.boundary()[x];
  }

  for (int n = 1; n <= config.max_iterations; ++n) {
    GammaResult step = gamma.apply(v);
    for (double value : step.v_next.values.data())
      if (!std::isfinite(value))
        throw NonFiniteValue("solve: non-finite value at iteration " + std::to_string(n), n);
    const double delta = sup_distance(step.v_next, v);
    report.deltas.push_back(delta);
    report.iterations = n;
    report.final_delta = delta;
    v = std::move(step.v_next);
    result.policies = std::move(step.policies);
    if (delta < report.threshold) {
      report.converged = true;
      break;
    }
  }
  result.value = std::move(v);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace ctsg
