#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctsg/matrix.hpp"

namespace ctsg {

struct State {
  int id = 0;
  std::optional<double> coord;

  friend bool operator==(const State&, const State&) = default;
};

/// A finite (or gridded) two-person zero-sum continuous-time game.
///
/// Player 1 maximizes, player 2 minimizes. For each state x the payoff rate
/// r(x,a,b) is stored as an |A(x)| x |B(x)| matrix, and the transition rates
/// q(y|x,a,b) as an (|A(x)|*|B(x)|) x N_x matrix whose row a*|B(x)|+b is the
/// generator row of the action pair (a,b).
struct GameModel {
  std::vector<State> states;
  std::vector<std::vector<int>> actions_p1;
  std::vector<std::vector<int>> actions_p2;
  std::vector<Matrix> payoff;
  std::vector<Matrix> generator;
  std::vector<double> terminal;
  double theta = 1.0;
  double horizon = 1.0;

  std::size_t num_states() const noexcept { return states.size(); }
  std::size_t num_p1(std::size_t x) const { return actions_p1[x].size(); }
  std::size_t num_p2(std::size_t x) const { return actions_p2[x].size(); }

  double reward(std::size_t x, std::size_t a, std::size_t b) const { return payoff[x](a, b); }
  std::span<const double> rates(std::size_t x, std::size_t a, std::size_t b) const {
    return generator[x].row(a * num_p2(x) + b);
  }
  std::span<double> rates(std::size_t x, std::size_t a, std::size_t b) {
    return generator[x].row(a * num_p2(x) + b);
  }
  /// Total jump rate q(x,a,b) = -q({x}|x,a,b).
  double exit_rate(std::size_t x, std::size_t a, std::size_t b) const {
    return -rates(x, a, b)[x];
  }

  /// Throws DimensionError when tensor shapes disagree with the state and
  /// action sets. Says nothing about generator invariants.
  void check_dimensions() const;

  /// q*(x) = max over (a,b) of -q(x|x,a,b).
  std::vector<double> stability_rates() const;
  /// ||q|| = sup_x q*(x).
  double rate_norm() const;
  /// ||r|| = sup |r(x,a,b)|.
  double payoff_norm() const;
  double max_abs_rate() const;

  friend bool operator==(const GameModel&, const GameModel&) = default;
};

/// Builds a model with the same action sets in every state.
/// payoff[x] must be |A| x |B| and generator[x] (|A|*|B|) x N_x.
GameModel make_uniform_action_model(std::size_t num_actions_p1, std::size_t num_actions_p2,
                                    std::vector<Matrix> payoff, std::vector<Matrix> generator,
                                    std::vector<double> terminal, double theta, double horizon,
                                    std::vector<double> coords = {});

enum class ViolationKind {
  kOffDiagonalNegative,
  kNotConservative,
  kUnstable,
  kNonFinite,
  kEmptyActionSet,
  kNonPositiveTheta,
  kNonPositiveHorizon,
};

std::string to_string(ViolationKind kind);

/// One broken invariant, with the (x,a,b,y) cell that witnesses it. Fields
/// that do not apply are -1.
struct Violation {
  ViolationKind kind;
  int x = -1;
  int a = -1;
  int b = -1;
  int y = -1;
  double residual = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<double> q_star;
  double conservativity_tolerance = 0.0;

  bool ok() const noexcept { return violations.empty(); }
};

/// Relative tolerance applied to generator row sums.
inline constexpr double kConservativityRelTol = 1e-12;

ValidationReport validate_generator(const GameModel& model);

/// Outcome of one numerical assumption check: ok iff the signed worst gap
/// max(lhs - rhs) is <= tol. residual is max(gap, 0).
struct CheckResult {
  bool ok = false;
  double worst_gap = 0.0;
  double residual = 0.0;
  int witness_x = -1;
  int witness_a = -1;
  int witness_b = -1;

  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

/// Candidate Lyapunov functions V0, V1 with the drift/growth constants, plus
/// the results of checking them against a model.
struct LyapunovCertificate {
  std::vector<double> v0;
  std::vector<double> v1;
  double rho0 = 1.0;
  double l0 = 1.0;
  double m0 = 1.0;
  double rho1 = 1.0;
  double b1 = 1.0;
  double m1 = 1.0;

  CheckResult drift0;        // sum_y V0(y) q(y|x,a,b) <= rho0 V0(x)
  CheckResult rate_bound;    // q*(x) <= L0 V0(x)
  CheckResult payoff_bound;  // |r|, |g| <= M0 + (sqrt2/2) sqrt(ln V0)
  CheckResult drift1;        // sum_y V1^2(y) q(y|x,a,b) <= rho1 V1^2(x) + b1
  CheckResult squeeze;       // V0^2 <= M1 V1
  /// Informational: |r| <= M0 + ln(V0)/(2 T theta), only meaningful when g == 0.
  std::optional<CheckResult> weak_payoff_bound;
  bool checked = false;

  bool drift0_ok() const noexcept { return checked && drift0.ok; }
  bool rate_bound_ok() const noexcept { return checked && rate_bound.ok; }
  bool payoff_bound_ok() const noexcept { return checked && payoff_bound.ok; }
  bool drift1_ok() const noexcept { return checked && drift1.ok; }
  bool squeeze_ok() const noexcept { return checked && squeeze.ok; }
  bool all_ok() const noexcept {
    return drift0_ok() && rate_bound_ok() && payoff_bound_ok() && drift1_ok() && squeeze_ok();
  }

  friend bool operator==(const LyapunovCertificate&, const LyapunovCertificate&) = default;
};

/// Certificate with V0 = V1 = 1 and the given constants; suits bounded models.
LyapunovCertificate constant_certificate(std::size_t num_states, double rho0, double l0, double m0,
                                         double rho1 = 1.0, double b1 = 1.0, double m1 = 1.0);

/// Fills the five checks of `cert` against `model`. Throws InvalidCertificate
/// if V0 or V1 drops below 1, a constant is not strictly positive, or the
/// vectors have the wrong length.
LyapunovCertificate check_assumptions(const GameModel& model, LyapunovCertificate cert,
                                      double tol);

/// Explicit two-sided bound on the risk-sensitive value of any policy pair.
struct ValueBounds {
  bool representable = true;
  std::string note;
  /// L = exp(2T theta (M0 + T theta) + 2 theta (M0 + theta) + rho0 T).
  double upper_const = 0.0;
  double log_upper_const = 0.0;
  /// c = theta [T e^{rho0 T} + M0 T + e^{rho0 T} + M0]; lower(x) = exp(-c V0(x)).
  double lower_exponent_const = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> log_lower;
  std::vector<double> log_upper;

  /// True iff value lies in [lower(x), upper(x)], compared in log space.
  bool contains(std::size_t x, double value) const;
};

/// Requires a certificate whose checks (i)-(iii) passed.
ValueBounds compute_value_bounds(const GameModel& model, const LyapunovCertificate& cert);

}  // namespace ctsg
