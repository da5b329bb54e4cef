#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ctsg/game_model.hpp"
#include "ctsg/shapley.hpp"

namespace ctsg {

/// Independent generator for path `index` of a run seeded with `seed`.
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index);

struct ActionPair {
  int a = -1;
  int b = -1;
};

/// A piecewise-constant sample path: the state is states[k] on
/// [times[k], times[k+1]) and states.back() until the horizon.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::size_t> states;
  /// For each jump k >= 1, the action pair whose rate produced it.
  std::vector<ActionPair> jump_actions;
  /// Candidate events of the dominating Poisson stream, accepted or not.
  std::size_t candidates = 0;
  /// int_{t0}^{T} sum_{a,b} pi1 pi2 r(x_s, a, b) ds.
  double payoff_integral = 0.0;

  std::size_t num_jumps() const noexcept { return states.size() - 1; }
  std::size_t state_at(double t) const;
};

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t paths = 0;
  /// Two-sided normal level of [mean - z se, mean + z se].
  double confidence_level = 0.95;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> samples;
};

/// Pairwise (cascade) summation.
double pairwise_sum(const double* data, std::size_t n);

/// Mean, sample standard error and 95% normal interval of `samples`
/// (moved into the result when `keep` is set). Needs at least two samples.
McEstimate summarize(std::vector<double> samples, bool keep = false);

/// Simulates the controlled chain under mixed Markov policies by thinning a
/// Poisson stream of rate ||q||. Policies are held constant on [t_i, t_{i+1}).
class PathSimulator {
 public:
  /// Throws DimensionError if `policies` does not fit `model`.
  PathSimulator(const GameModel& model, const PolicyPair& policies);

  const GameModel& model() const noexcept { return *model_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  double dominating_rate() const noexcept { return lambda_; }

  /// Path from (t0, x0) to the horizon. t0 must be a grid node.
  Trajectory sample(std::size_t x0, double t0, std::mt19937_64& rng) const;

  /// exp(theta (payoff integral + g(X_T))) of one path.
  double risk_functional(const Trajectory& path) const;

 private:
  struct Cell {
    double rbar = 0.0;
    double qbar = 0.0;
    std::vector<double> pair_cdf;  // cumulative pi1 pi2 q(x,a,b) over pairs
  };
  struct Kernel {
    std::vector<std::size_t> dest;
    std::vector<double> cdf;
  };
  const Cell& cell(std::size_t i, std::size_t x) const { return cells_[i * n_ + x]; }

  const GameModel* model_;
  TimeGrid grid_;
  std::size_t n_;
  double lambda_;
  std::vector<Cell> cells_;
  std::vector<std::vector<Kernel>> kernels_;  // [x][pair]
};

Trajectory sample_path(const GameModel& model, const PolicyPair& policies, std::size_t x0,
                       std::uint64_t seed, double t0 = 0.0);

struct SimulationOptions {
  int threads = 0;
  bool keep_samples = false;
};

/// Monte Carlo estimate of E[exp(theta int_{t0}^T r dpi1 dpi2 ds + theta g(X_T))]
/// from (t0, x0). Path k uses path_rng(seed, k), so the result does not
/// depend on the thread count. Throws PreconditionError if paths < 2 or t0 is
/// not a grid node.
McEstimate estimate_value(const GameModel& model, const PolicyPair& policies, std::size_t x0,
                          double t0, std::size_t paths, std::uint64_t seed,
                          const SimulationOptions& options = {});

/// Monte Carlo estimate of E[f(X_t)] from (0, x0); f indexed by state.
McEstimate estimate_state_moment(const GameModel& model, const PolicyPair& policies,
                                 const std::vector<double>& f, std::size_t x0, double t,
                                 std::size_t paths, std::uint64_t seed,
                                 const SimulationOptions& options = {});

struct DeviationOptions {
  /// Largest number of pure stationary deviations enumerated exhaustively.
  std::size_t max_enumerated = 4096;
  /// Deviations drawn at random when the enumeration would be larger.
  std::size_t sampled = 256;
  /// Start states; empty means every state.
  std::vector<std::size_t> start_states;
  int threads = 0;
};

struct DeviationReport {
  /// Best estimated improvement for the deviating player (positive = profitable).
  double gain = 0.0;
  /// Standard error of the paired difference behind `gain`.
  double standard_error = 0.0;
  std::size_t x0 = 0;
  /// Chosen action index per state of the best deviation.
  std::vector<int> actions;
  std::size_t deviations_tried = 0;
  /// True when the deviation set was sampled rather than enumerated.
  bool sampled = false;
  McEstimate base;
};

/// Replaces player `player` (1 or 2) by every deterministic stationary pure
/// policy (one action per state, all times) and reports the largest
/// improvement over `base` across deviations and start states, using common
/// random numbers across deviations.
DeviationReport deviation_gain(const GameModel& model, const PolicyPair& base, int player,
                               std::size_t paths, std::uint64_t seed,
                               const DeviationOptions& options = {});

}  // namespace ctsg
