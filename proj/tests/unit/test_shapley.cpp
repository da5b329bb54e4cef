#include <cmath>
#include <random>

#include "ctsg/errors.hpp"
#include "ctsg/shapley.hpp"
#include "doctest.h"
#include "support/test_models.hpp"

using namespace ctsg;

TEST_CASE("time grid nodes and interval lookup") {
  const TimeGrid g(1.0, 10);
  CHECK(g.num_nodes() == 11);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(10) == 1.0);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(g.node(i) < g.node(i + 1));
    CHECK(g.interval_of(g.node(i)) == i);
    CHECK(g.interval_of(0.5 * (g.node(i) + g.node(i + 1))) == i);
  }
  CHECK(g.interval_of(1.0) == 10);
  CHECK(g.node_index(0.3) == 3);
  CHECK(g.node_index(0.35) == -1);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), PreconditionError);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), PreconditionError);
}

TEST_CASE("weighted payoff: zero payoff and constant v give zero") {
  GameModel m = testing::two_state_fixture();
  for (auto& r : m.payoff) r = Matrix(2, 2);
  const ValueGrid v(TimeGrid(1.0, 4), 2, 1.0);
  for (std::size_t x = 0; x < 2; ++x) {
    const Matrix c = weighted_payoff(m, v, 2, x);
    for (double e : c.data()) CHECK(std::abs(e) <= 1e-15);
  }
}

TEST_CASE("weighted payoff: theta r v with constant v") {
  GameModel m = testing::two_state_fixture();
  for (auto& r : m.payoff) r = Matrix(2, 2, 2.0);
  const ValueGrid v(TimeGrid(1.0, 4), 2, 1.0);
  const Matrix c = weighted_payoff(m, v, 0, 1);
  for (double e : c.data()) CHECK(e == doctest::Approx(2.0));
}

TEST_CASE("weighted payoff: direct dot product with the generator row") {
  const GameModel m = make_uniform_action_model(1, 1, {Matrix{{0.0}}, Matrix{{0.0}}},
                                                {Matrix{{-1.0, 1.0}}, Matrix{{0.0, 0.0}}}, {0.0, 0.0},
                                                1.0, 1.0);
  ValueGrid v(TimeGrid(1.0, 1), 2);
  v(0, 0) = 1.0;
  v(0, 1) = 3.0;
  CHECK(weighted_payoff(m, v, 0, 0)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("game value field of a 1x1 single-state game is theta r0 v") {
  const GameModel m = testing::single_state_model(0.7, 0.0, 2.0);
  ValueGrid v(TimeGrid(1.0, 3), 1);
  for (std::size_t i = 0; i < 4; ++i) v(i, 0) = 1.0 + i;
  const GameField f = game_value_field(m, v);
  for (std::size_t i = 0; i < 4; ++i) CHECK(f.a_field(i, 0) == doctest::Approx(2.0 * 0.7 * (1.0 + i)));
}

TEST_CASE("apply_gamma: zero model keeps v = 1 fixed") {
  GameModel m = testing::two_state_fixture();
  for (auto& r : m.payoff) r = Matrix(2, 2);
  m.terminal = {0.0, 0.0};
  const ValueGrid v(TimeGrid(1.0, 8), 2, 1.0);
  const GammaResult g = apply_gamma(m, v);
  CHECK(sup_distance(g.v_next, v) <= 1e-14);
}

TEST_CASE("apply_gamma: one step from v = 1 integrates theta r0 exactly") {
  const double r0 = 0.5, theta = 1.3;
  const GameModel m = testing::single_state_model(r0, 0.0, theta, 2.0);
  const TimeGrid grid(2.0, 16);
  const ValueGrid v(grid, 1, 1.0);
  const GammaResult g = apply_gamma(m, v);
  for (std::size_t i = 0; i < grid.num_nodes(); ++i)
    CHECK(g.v_next(i, 0) == doctest::Approx(1.0 + theta * r0 * (2.0 - grid.node(i))).epsilon(1e-13));
}

TEST_CASE("apply_gamma: boundary row is exactly exp(theta g)") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const GameModel m = testing::random_model(rng, 4, 2, 3);
    ValueGrid v(TimeGrid(1.0, 5), 4);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (auto& e : v.values.data()) e = u(rng);
    const GammaResult g = apply_gamma(m, v);
    for (std::size_t x = 0; x < 4; ++x) CHECK(g.v_next(5, x) == std::exp(m.theta * m.terminal[x]));
    g.policies.check_against(m);
  }
}

TEST_CASE("apply_gamma rejects exp(theta g) overflow before iterating") {
  GameModel m = testing::single_state_model(0.0, 800.0);
  const ValueGrid v(TimeGrid(1.0, 2), 1, 1.0);
  CHECK_THROWS_AS(apply_gamma(m, v), ModelScaleError);
}

TEST_CASE("k-step contraction of Gamma on random grids") {
  // ||Gamma^n v - Gamma^n w|| <= (L~ T)^n / n! ||v - w||, up to quadrature error.
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const GameModel m = testing::random_model(rng, 3, 2, 2);
    const double lt = m.theta * m.payoff_norm() + 2.0 * m.rate_norm();
    const TimeGrid grid(1.0, 256);
    ValueGrid v(grid, 3), w(grid, 3);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (auto& e : v.values.data()) e = u(rng);
    for (auto& e : w.values.data()) e = u(rng);
    const double d0 = sup_distance(v, w);
    const ShapleyOperator gamma(m);
    double envelope = 1.0;
    for (int n = 1; n <= 6; ++n) {
      v = gamma.apply(v).v_next;
      w = gamma.apply(w).v_next;
      envelope *= lt / n;
      CHECK(sup_distance(v, w) <= 1.05 * envelope * d0);
    }
  }
}

TEST_CASE("RPS-like antisymmetric payoff gives uniform policies when v is constant in x") {
  const double s = 0.4;
  Matrix r{{0, s, -s}, {-s, 0, s}, {s, -s, 0}};
  const GameModel m = make_uniform_action_model(3, 3, {r}, {Matrix(9, 1)}, {0.0}, 1.0, 1.0);
  const ValueGrid v(TimeGrid(1.0, 2), 1, 1.7);
  const GameField f = game_value_field(m, v);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(f.a_field(i, 0)) <= 1e-9);
    for (double p : f.policies.p1(i, 0)) CHECK(p == doctest::Approx(1.0 / 3.0));
    for (double p : f.policies.p2(i, 0)) CHECK(p == doctest::Approx(1.0 / 3.0));
  }
}
