#include "ctsg/shapley.hpp"

#include <cmath>
#include <string>

#include "ctsg/errors.hpp"
#include "ctsg/parallel.hpp"

namespace ctsg {

TimeGrid::TimeGrid(double horizon_, int n_steps_) : horizon(horizon_), n_steps(n_steps_) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw PreconditionError("time grid horizon must be positive and finite");
  if (n_steps < 1) throw PreconditionError("time grid needs at least one step");
}

double TimeGrid::node(std::size_t i) const noexcept {
  return horizon * static_cast<double>(i) / static_cast<double>(n_steps);
}

std::size_t TimeGrid::interval_of(double t) const noexcept {
  if (t <= 0.0) return 0;
  if (t >= horizon) return static_cast<std::size_t>(n_steps);
  auto i = static_cast<std::size_t>(std::floor(t / dt()));
  // Guard against t / dt landing just below an integer it should equal.
  while (i + 1 <= static_cast<std::size_t>(n_steps) && node(i + 1) <= t) ++i;
  while (i > 0 && node(i) > t) --i;
  return i;
}

int TimeGrid::node_index(double t) const noexcept {
  const double r = std::round(t / dt());
  if (r < 0.0 || r > n_steps) return -1;
  const int i = static_cast<int>(r);
  return std::abs(node(static_cast<std::size_t>(i)) - t) <= 1e-9 * horizon ? i : -1;
}

double sup_distance(const ValueGrid& v, const ValueGrid& w) {
  if (v.values.rows() != w.values.rows() || v.values.cols() != w.values.cols())
    throw DimensionError("value grids differ in shape");
  double d = 0.0;
  const auto a = v.values.data();
  const auto b = w.values.data();
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

void PolicyPair::check_against(const GameModel& model) const {
  if (num_states != model.num_states())
    throw DimensionError("policy state count differs from model");
  const std::size_t cells = grid.num_nodes() * num_states;
  if (pi1.size() != cells || pi2.size() != cells)
    throw DimensionError("policy does not cover every (t_i, x) node");
  auto check = [](const std::vector<double>& p, std::size_t expected, std::size_t i, std::size_t x) {
    if (p.size() != expected)
      throw DimensionError("policy at t_index " + std::to_string(i) + ", state " +
                           std::to_string(x) + " has the wrong number of actions");
    double sum = 0.0;
    for (double w : p) {
      if (!(w >= 0.0)) throw DimensionError("policy weight negative or not finite");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw DimensionError("policy at t_index " + std::to_string(i) + ", state " +
                           std::to_string(x) + " does not sum to 1");
  };
  for (std::size_t i = 0; i < grid.num_nodes(); ++i)
    for (std::size_t x = 0; x < num_states; ++x) {
      check(p1(i, x), model.num_p1(x), i, x);
      check(p2(i, x), model.num_p2(x), i, x);
    }
}

PolicyPair uniform_policies(const GameModel& model, TimeGrid grid) {
  PolicyPair p(grid, model.num_states());
  for (std::size_t i = 0; i < grid.num_nodes(); ++i)
    for (std::size_t x = 0; x < model.num_states(); ++x) {
      p.p1(i, x).assign(model.num_p1(x), 1.0 / static_cast<double>(model.num_p1(x)));
      p.p2(i, x).assign(model.num_p2(x), 1.0 / static_cast<double>(model.num_p2(x)));
    }
  return p;
}

ShapleyOperator::ShapleyOperator(const GameModel& model, unsigned threads)
    : model_(&model), threads_(threads == 0 ? 1 : threads) {
  model.check_dimensions();
  const std::size_t n = model.num_states();
  boundary_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    boundary_[x] = std::exp(model.theta * model.terminal[x]);
    if (!std::isfinite(boundary_[x]) || boundary_[x] <= 0.0)
      throw ModelScaleError("exp(theta * g) is not representable at state " + std::to_string(x));
  }
  rows_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t pairs = model.num_p1(x) * model.num_p2(x);
    rows_[x].resize(pairs);
    for (std::size_t k = 0; k < pairs; ++k) {
      const auto row = model.generator[x].row(k);
      for (std::size_t y = 0; y < n; ++y)
        if (row[y] != 0.0) rows_[x][k].push_back(Entry{y, row[y]});
    }
  }
}

Matrix ShapleyOperator::weighted_payoff(const ValueGrid& v, std::size_t t_index,
                                        std::size_t x) const {
  const GameModel& m = *model_;
  if (t_index >= v.values.rows() || x >= m.num_states() || v.num_states() != m.num_states())
    throw DimensionError("weighted_payoff index out of range");
  const std::size_t nb = m.num_p2(x);
  const auto vt = v.values.row(t_index);
  Matrix c(m.num_p1(x), nb);
  for (std::size_t a = 0; a < m.num_p1(x); ++a)
    for (std::size_t b = 0; b < nb; ++b) {
      double s = m.theta * m.reward(x, a, b) * vt[x];
      for (const Entry& e : rows_[x][a * nb + b]) s += vt[e.y] * e.rate;
      c(a, b) = s;
    }
  return c;
}

GameField ShapleyOperator::game_value_field(const ValueGrid& v) const {
  const std::size_t n = model_->num_states();
  if (v.num_states() != n) throw DimensionError("value grid state count differs from model");
  const std::size_t nodes = v.grid.num_nodes();
  GameField out{Matrix(nodes, n), PolicyPair(v.grid, n)};
  parallel_for(nodes * n, threads_, [&](std::size_t cell) {
    const std::size_t i = cell / n;
    const std::size_t x = cell % n;
    const MatrixGameSolution sol = solve_matrix_game(weighted_payoff(v, i, x));
    out.a_field(i, x) = sol.value;
    out.policies.p1(i, x) = sol.strategy_p1;
    out.policies.p2(i, x) = sol.strategy_p2;
  });
  return out;
}

GammaResult ShapleyOperator::apply(const ValueGrid& v) const {
  GameField field = game_value_field(v);
  const std::size_t n = model_->num_states();
  const TimeGrid& grid = v.grid;
  const std::size_t last = static_cast<std::size_t>(grid.n_steps);
  const double half_dt = 0.5 * grid.dt();
  ValueGrid next(grid, n);
  for (std::size_t x = 0; x < n; ++x) {
    double q = 0.0;
    next(last, x) = boundary_[x];
    for (std::size_t i = last; i-- > 0;) {
      q += half_dt * (field.a_field(i, x) + field.a_field(i + 1, x));
      next(i, x) = boundary_[x] + q;
    }
  }
  return GammaResult{std::move(next), std::move(field.policies)};
}

Matrix weighted_payoff(const GameModel& model, const ValueGrid& v, std::size_t t_index,
                       std::size_t x) {
  return ShapleyOperator(model).weighted_payoff(v, t_index, x);
}

GameField game_value_field(const GameModel& model, const ValueGrid& v) {
  return ShapleyOperator(model).game_value_field(v);
}

GammaResult apply_gamma(const GameModel& model, const ValueGrid& v) {
  return ShapleyOperator(model).apply(v);
}

}  // namespace ctsg
