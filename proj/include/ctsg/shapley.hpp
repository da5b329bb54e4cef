#pragma once

#include <cstddef>
#include <vector>

#include "ctsg/game_model.hpp"
#include "ctsg/matrix.hpp"
#include "ctsg/matrix_game.hpp"

namespace ctsg {

/// Uniform grid t_i = i * T / N_t, i = 0..N_t.
struct TimeGrid {
  double horizon = 1.0;
  int n_steps = 1;

  TimeGrid() = default;
  /// Throws PreconditionError unless horizon > 0 and n_steps >= 1.
  TimeGrid(double horizon, int n_steps);

  double dt() const noexcept { return horizon / n_steps; }
  std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(n_steps) + 1; }
  /// Exact at both ends: node(0) == 0, node(n_steps) == horizon.
  double node(std::size_t i) const noexcept;
  /// Index i with t in [t_i, t_{i+1}); t == horizon maps to n_steps.
  std::size_t interval_of(double t) const noexcept;
  /// Index of the node equal to t within 1e-9 * horizon, or -1.
  int node_index(double t) const noexcept;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// v(t_i, x) stored as an (N_t + 1) x N_x matrix.
struct ValueGrid {
  TimeGrid grid;
  Matrix values;

  ValueGrid() = default;
  ValueGrid(TimeGrid grid, std::size_t num_states, double fill = 0.0)
      : grid(grid), values(grid.num_nodes(), num_states, fill) {}

  std::size_t num_states() const noexcept { return values.cols(); }
  double operator()(std::size_t i, std::size_t x) const { return values(i, x); }
  double& operator()(std::size_t i, std::size_t x) { return values(i, x); }

  friend bool operator==(const ValueGrid&, const ValueGrid&) = default;
};

/// sup over cells of |v - w|. Throws DimensionError on shape mismatch.
double sup_distance(const ValueGrid& v, const ValueGrid& w);

/// Mixed Markov policies of both players at every (t_i, x), held constant on
/// [t_i, t_{i+1}).
struct PolicyPair {
  TimeGrid grid;
  std::size_t num_states = 0;
  /// pi1[i * num_states + x] is a distribution over A(x); likewise pi2 over B(x).
  std::vector<std::vector<double>> pi1;
  std::vector<std::vector<double>> pi2;

  PolicyPair() = default;
  PolicyPair(TimeGrid grid, std::size_t num_states)
      : grid(grid),
        num_states(num_states),
        pi1(grid.num_nodes() * num_states),
        pi2(grid.num_nodes() * num_states) {}

  const std::vector<double>& p1(std::size_t i, std::size_t x) const { return pi1[i * num_states + x]; }
  const std::vector<double>& p2(std::size_t i, std::size_t x) const { return pi2[i * num_states + x]; }
  std::vector<double>& p1(std::size_t i, std::size_t x) { return pi1[i * num_states + x]; }
  std::vector<double>& p2(std::size_t i, std::size_t x) { return pi2[i * num_states + x]; }

  /// Throws DimensionError unless the shapes match `model` and every entry is
  /// a distribution (nonnegative, sum 1 within 1e-10).
  void check_against(const GameModel& model) const;

  friend bool operator==(const PolicyPair&, const PolicyPair&) = default;
};

/// Uniform mixed strategies for both players at every node.
PolicyPair uniform_policies(const GameModel& model, TimeGrid grid);

/// c(t_i, x, v, a, b) = theta r(x,a,b) v(t_i,x) + sum_y v(t_i,y) q(y|x,a,b).
Matrix weighted_payoff(const GameModel& model, const ValueGrid& v, std::size_t t_index,
                       std::size_t x);

struct GameField {
  Matrix a_field;  // (N_t + 1) x N_x matrix-game values
  PolicyPair policies;
};

struct GammaResult {
  ValueGrid v_next;
  PolicyPair policies;
};

/// Precomputed sparse form of a model for repeated Gamma applications.
class ShapleyOperator {
 public:
  /// Throws ModelScaleError if exp(theta g) overflows.
  explicit ShapleyOperator(const GameModel& model, unsigned threads = 1);

  const GameModel& model() const noexcept { return *model_; }
  const std::vector<double>& boundary() const noexcept { return boundary_; }

  Matrix weighted_payoff(const ValueGrid& v, std::size_t t_index, std::size_t x) const;
  GameField game_value_field(const ValueGrid& v) const;
  GammaResult apply(const ValueGrid& v) const;

 private:
  struct Entry {
    std::size_t y;
    double rate;
  };
  const GameModel* model_;
  unsigned threads_;
  std::vector<double> boundary_;
  // rows_[x][a * |B(x)| + b] lists the nonzero generator entries.
  std::vector<std::vector<std::vector<Entry>>> rows_;
};

GameField game_value_field(const GameModel& model, const ValueGrid& v);
GammaResult apply_gamma(const GameModel& model, const ValueGrid& v);

}  // namespace ctsg
