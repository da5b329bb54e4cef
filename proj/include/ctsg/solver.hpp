#pragma once

#include <optional>
#include <vector>

#include "ctsg/game_model.hpp"
#include "ctsg/shapley.hpp"

namespace ctsg {

struct SolverConfig {
  double epsilon = 1e-3;
  int n_t = 256;
  int max_iterations = 10000;
  /// 0 = resolve from CTSG_THREADS / hardware.
  int threads = 0;
};

struct ContractionConstants {
  double l_tilde = 0.0;
  int k = 1;
  double beta = 0.0;
};

struct SolverReport {
  int iterations = 0;
  double final_delta = 0.0;
  double threshold = 0.0;
  double norm_r = 0.0;
  double norm_q = 0.0;
  ContractionConstants contraction;
  bool converged = false;
  /// ||r|| = 0, so the threshold used the limit form.
  bool degenerate_payoff_norm = false;
  double wall_time_seconds = 0.0;
  /// deltas[n] = ||v_{n+1} - v_n|| for every iteration performed.
  std::vector<double> deltas;
};

struct SolveResult {
  ValueGrid value;
  PolicyPair policies;
  SolverReport report;
};

/// eps / (2 e^{(theta ||r|| + 2 ||q||) T} (1 + 2 ||q|| / (theta ||r||))).
/// With norm_r == 0 the formula is undefined; the limit form
/// eps / (2 e^{2 ||q|| T} (1 + 2 ||q|| T theta)) is returned and a warning
/// is written to std::clog.
double stopping_threshold(double epsilon, double theta, double norm_r, double norm_q, double T);

/// L~ = theta ||r|| + 2 ||q||; k the least positive integer with
/// L~^k T^k / k! < 1; beta that value.
ContractionConstants contraction_constants(double theta, double norm_r, double norm_q, double T);

/// Value iteration v_{n+1} = Gamma v_n from `v0` (default: exp(theta g)
/// replicated in t) until the sup-cell difference drops below the stopping
/// threshold or max_iterations is reached. Throws PreconditionError if the
/// model fails validate_generator and NonFiniteValue if an iterate blows up.
SolveResult solve(const GameModel& model, const SolverConfig& config,
                  const std::optional<ValueGrid>& v0 = std::nullopt);

}  // namespace ctsg
