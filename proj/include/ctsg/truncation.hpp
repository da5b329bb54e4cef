#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctsg/game_model.hpp"
#include "ctsg/shapley.hpp"
#include "ctsg/solver.hpp"

namespace ctsg {

/// Bounded nonnegative model at level n: on S_n = {V0 <= n} the generator is
/// kept and r, g are capped at n; off S_n the state is absorbing with
/// r = g = 0. Throws PreconditionError if r or g is negative anywhere.
GameModel truncate_nonnegative(const GameModel& model, const LyapunovCertificate& cert, int n);

/// Number of states in {V0 <= n}.
std::size_t sublevel_size(const LyapunovCertificate& cert, int n);

/// r_n = max(-n, r), g_n = max(-n, g).
GameModel floor_payoffs(const GameModel& model, int n);

/// Model with payoff r_n + n and terminal g_n + n, plus the map back to
/// values of the floored model: v -> v exp(-theta (T - t) n - theta n).
struct ShiftedModel {
  GameModel model;
  int n = 0;
  double theta = 1.0;
  double horizon = 1.0;

  double unshift_factor(double t) const;
  ValueGrid unshift(const ValueGrid& v) const;
};

ShiftedModel floor_and_shift(const GameModel& model, int n);

enum class LadderKind { kNonnegative, kFloor };

std::string to_string(LadderKind kind);
/// Throws PreconditionError for anything but "nonnegative" or "floor".
LadderKind parse_ladder_kind(const std::string& name);

struct LadderLevel {
  int n = 0;
  std::size_t states_in_level = 0;
  bool converged = false;
  int iterations = 0;
  double threshold = 0.0;
  /// Values in the units of the input model (pre-shift undone).
  ValueGrid value;
  std::string error;
};

struct LadderReport {
  LadderKind kind = LadderKind::kNonnegative;
  /// Shift applied before a nonnegative ladder when the model has negative r or g.
  std::optional<int> pre_shift;
  std::vector<LadderLevel> levels;
  /// sup over cells of |v_{k+1} - v_k| between consecutive levels.
  std::vector<double> sup_differences;
  /// Largest step against the expected direction (0 when monotone).
  double worst_monotonicity_violation = 0.0;
  bool monotone = true;
  bool differences_decreasing = true;
  /// Set when stop_tolerance cut the ladder short of its last level.
  bool stopped_early = false;
};

/// Solves each level's bounded model. The nonnegative ladder expects values
/// nondecreasing in n, the floor ladder nonincreasing; a step against the
/// direction larger than 10x the larger stopping threshold of the two levels
/// clears `monotone`. A level that fails to converge or throws is recorded and
/// the ladder continues. With stop_tolerance > 0 the ladder stops after the
/// first level whose sup-difference to its predecessor is below it.
LadderReport run_ladder(const GameModel& model, const LyapunovCertificate& cert,
                        const std::vector<int>& levels, const SolverConfig& config,
                        LadderKind kind = LadderKind::kNonnegative, double stop_tolerance = 0.0);

}  // namespace ctsg
