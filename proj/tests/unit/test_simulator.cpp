#include <algorithm>
#include <cmath>
#include <random>

#include "ctsg/errors.hpp"
#include "ctsg/simulator.hpp"
#include "ctsg/solver.hpp"
#include "doctest.h"
#include "support/test_models.hpp"

using namespace ctsg;

namespace {

// Two states; state 0 leaves at rate `rate`, state 1 is absorbing.
GameModel leak_model(double rate, double horizon) {
  return make_uniform_action_model(1, 1, {Matrix{{0.0}}, Matrix{{0.0}}},
                                   {Matrix{{-rate, rate}}, Matrix{{0.0, 0.0}}}, {0.0, 0.0}, 1.0, horizon);
}

// Kolmogorov-Smirnov distance between a sample and a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!std::isfinite(xs[k])) break;  // atom at infinity
    const double f = cdf(xs[k]);
    d = std::max({d, (k + 1) / n - f, f - k / n});
  }
  return d;
}

}  // namespace

TEST_CASE("pairwise summation and summary statistics") {
  std::vector<double> xs(1001);
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = static_cast<double>(k);
  CHECK(pairwise_sum(xs.data(), xs.size()) == 500500.0);
  const McEstimate e = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(e.mean == 2.5);
  CHECK(e.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.ci_low < e.mean);
  CHECK_THROWS_AS(summarize({1.0}), PreconditionError);
}

TEST_CASE("no rates: the path never jumps") {
  const GameModel m = leak_model(0.0, 1.0);
  const PolicyPair p = uniform_policies(m, TimeGrid(1.0, 4));
  const Trajectory t = sample_path(m, p, 0, 1);
  CHECK(t.num_jumps() == 0);
  CHECK(t.candidates == 0);
  CHECK(t.states.front() == 0);
}

TEST_CASE("first jump time is exponential(lambda)") {
  const double rate = 1.7;
  const GameModel m = leak_model(rate, 50.0);
  const PolicyPair p = uniform_policies(m, TimeGrid(50.0, 10));
  const PathSimulator sim(m, p);
  std::vector<double> jumps;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    auto rng = path_rng(3, k);
    const Trajectory t = sim.sample(0, 0.0, rng);
    if (t.num_jumps() > 0) jumps.push_back(t.times[1]);
  }
  // P(no jump before 50) = e^{-85}, so every path jumps.
  REQUIRE(jumps.size() == 10000);
  const double d = ks_statistic(jumps, [&](double x) { return 1.0 - std::exp(-rate * x); });
  CHECK(d < 1.63 / std::sqrt(10000.0));
}

TEST_CASE("thinning matches the survival function of a two-piece policy") {
  // State 0 has two actions for player 1 with exit rates 0.5 and 3. The
  // policy plays the slow action on [0, 1) and the fast one on [1, 2).
  const GameModel m = make_uniform_action_model(
      2, 1, {Matrix{{0.0}, {0.0}}, Matrix{{0.0}, {0.0}}},
      {Matrix{{-0.5, 0.5}, {-3.0, 3.0}}, Matrix{{0.0, 0.0}, {0.0, 0.0}}}, {0.0, 0.0}, 1.0, 2.0);
  PolicyPair p = uniform_policies(m, TimeGrid(2.0, 2));
  for (std::size_t x = 0; x < 2; ++x) {
    p.p1(0, x) = {1.0, 0.0};
    p.p1(1, x) = {0.0, 1.0};
    p.p1(2, x) = {0.0, 1.0};
  }
  const PathSimulator sim(m, p);
  CHECK(sim.dominating_rate() == 3.0);
  std::vector<double> jumps;
  const std::size_t n = 20000;
  for (std::uint64_t k = 0; k < n; ++k) {
    auto rng = path_rng(4, k);
    const Trajectory t = sim.sample(0, 0.0, rng);
    jumps.push_back(t.num_jumps() > 0 ? t.times[1] : INFINITY);
  }
  auto cdf = [](double s) {
    const double h = s < 1.0 ? 0.5 * s : 0.5 + 3.0 * (s - 1.0);
    return 1.0 - std::exp(-h);
  };
  // Paths without a jump (mass e^{-3.5}) sit at infinity.
  CHECK(ks_statistic(jumps, cdf) < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("symmetric two-state chain spends about half its time in each state") {
  const GameModel m = make_uniform_action_model(1, 1, {Matrix{{0.0}}, Matrix{{0.0}}},
                                                {Matrix{{-1.0, 1.0}}, Matrix{{1.0, -1.0}}},
                                                {0.0, 0.0}, 1.0, 20.0);
  const PolicyPair p = uniform_policies(m, TimeGrid(20.0, 4));
  const McEstimate e = estimate_state_moment(m, p, {1.0, 0.0}, 0, 20.0, 20000, 5);
  CHECK(std::abs(e.mean - 0.5) <= 3.0 * e.standard_error + 1e-3);
}

TEST_CASE("risk functional is exactly 1 for the zero model") {
  GameModel m = testing::two_state_fixture();
  for (auto& r : m.payoff) r = Matrix(2, 2);
  m.terminal = {0.0, 0.0};
  const PolicyPair p = uniform_policies(m, TimeGrid(1.0, 8));
  const McEstimate e = estimate_value(m, p, 0, 0.0, 1000, 6);
  CHECK(e.mean == 1.0);
  CHECK(e.standard_error == 0.0);
}

TEST_CASE("single state: every path gives exp(theta r0 (T - t0) + theta g0)") {
  const GameModel m = testing::single_state_model(0.4, 0.3, 1.5, 2.0);
  const PolicyPair p = uniform_policies(m, TimeGrid(2.0, 8));
  const McEstimate e = estimate_value(m, p, 0, 0.5, 100, 7, {0, true});
  for (double v : e.samples) CHECK(v == doctest::Approx(std::exp(1.5 * 0.4 * 1.5 + 1.5 * 0.3)));
  CHECK(e.standard_error <= 1e-12);
}

TEST_CASE("estimate_value preconditions") {
  const GameModel m = testing::two_state_fixture();
  const PolicyPair p = uniform_policies(m, TimeGrid(1.0, 8));
  CHECK_THROWS_AS(estimate_value(m, p, 0, 0.0, 1, 1), PreconditionError);
  CHECK_THROWS_AS(estimate_value(m, p, 0, 0.1, 10, 1), PreconditionError);
  PolicyPair bad = p;
  bad.p1(0, 0) = {0.7, 0.7};
  CHECK_THROWS_AS(estimate_value(m, bad, 0, 0.0, 10, 1), DimensionError);
}

TEST_CASE("estimates are reproducible and independent of threads") {
  const GameModel m = testing::two_state_fixture();
  const PolicyPair p = uniform_policies(m, TimeGrid(1.0, 16));
  const McEstimate a = estimate_value(m, p, 1, 0.0, 5000, 42, {1, true});
  const McEstimate b = estimate_value(m, p, 1, 0.0, 5000, 42, {4, true});
  CHECK(a.samples == b.samples);
  CHECK(a.mean == b.mean);
}

TEST_CASE("estimates over disjoint seeds agree within three pooled standard errors") {
  const GameModel m = testing::two_state_fixture();
  const PolicyPair p = uniform_policies(m, TimeGrid(1.0, 16));
  const McEstimate a = estimate_value(m, p, 0, 0.0, 20000, 1);
  const McEstimate b = estimate_value(m, p, 0, 0.0, 20000, 2);
  CHECK(a.mean > 0.0);
  CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.standard_error, b.standard_error));
}

TEST_CASE("jump log records the responsible action pair") {
  // Only (a=1, b=0) has a positive rate at state 0.
  const GameModel m = make_uniform_action_model(
      2, 2, {Matrix(2, 2), Matrix(2, 2)},
      {Matrix{{0.0, 0.0}, {0.0, 0.0}, {-2.0, 2.0}, {0.0, 0.0}}, Matrix(4, 2)}, {0.0, 0.0}, 1.0, 5.0);
  const PolicyPair p = uniform_policies(m, TimeGrid(5.0, 5));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Trajectory t = sample_path(m, p, 0, seed);
    for (const auto& ap : t.jump_actions) {
      CHECK(ap.a == 1);
      CHECK(ap.b == 0);
    }
  }
}

TEST_CASE("solver value matches Monte Carlo on the two-state fixture") {
  const GameModel m = testing::two_state_fixture();
  const SolveResult s = solve(m, SolverConfig{1e-3, 64, 1000, 1});
  for (std::size_t x = 0; x < 2; ++x) {
    const McEstimate e = estimate_value(m, s.policies, x, 0.0, 40000, 100 + x);
    CHECK(std::abs(e.mean - s.value(0, x)) <= 3.0 * e.standard_error + 1e-3);
  }
}

TEST_CASE("mean of V0(x_t) stays below e^{rho0 t} V0(x0)") {
  // V0 = (1, 3): drift sum_y V0(y) q(y|x) = 2 q(1|0) at x = 0 and -2 q(0|1) at x = 1;
  // with q(1|0) <= 2 this is <= 4 = rho0 V0(0) for rho0 = 4.
  const GameModel m = testing::two_state_fixture();
  LyapunovCertificate cert = testing::two_state_certificate();
  cert.v0 = {1.0, 3.0};
  cert.rho0 = 4.0;
  cert.m0 = 1.0;
  cert = check_assumptions(m, cert, 1e-12);
  REQUIRE(cert.drift0_ok());
  const PolicyPair p = uniform_policies(m, TimeGrid(1.0, 8));
  for (double t : {0.25, 0.5, 1.0}) {
    const McEstimate e = estimate_state_moment(m, p, cert.v0, 0, t, 20000, 9);
    CHECK(e.mean <= std::exp(cert.rho0 * t) * cert.v0[0] + 3.0 * e.standard_error);
  }
}

TEST_CASE("deviation gain vanishes at an exact equilibrium of a zero-payoff model") {
  GameModel m = testing::two_state_fixture();
  for (auto& r : m.payoff) r = Matrix(2, 2);
  m.terminal = {0.0, 0.0};
  const PolicyPair p = uniform_policies(m, TimeGrid(1.0, 8));
  for (int player : {1, 2}) {
    const DeviationReport d = deviation_gain(m, p, player, 2000, 3);
    CHECK(d.gain == 0.0);
    CHECK(d.deviations_tried == 4);
    CHECK_FALSE(d.sampled);
  }
}

TEST_CASE("a perturbed policy on a strict saddle is exploited by the opponent") {
  const GameModel m = testing::strict_saddle_model();
  const SolveResult s = solve(m, SolverConfig{1e-3, 16, 100, 1});
  for (std::size_t i = 0; i < s.policies.grid.num_nodes(); ++i) {
    CHECK(s.policies.p1(i, 0)[0] == doctest::Approx(1.0));
    CHECK(s.policies.p2(i, 0)[0] == doctest::Approx(1.0));
  }
  CHECK(deviation_gain(m, s.policies, 1, 100, 1).gain <= 1e-12);
  CHECK(deviation_gain(m, s.policies, 2, 100, 1).gain <= 1e-12);

  PolicyPair swapped = s.policies;
  for (auto& p : swapped.pi1) std::swap(p[0], p[1]);
  const DeviationReport d = deviation_gain(m, swapped, 2, 100, 1);
  CHECK(d.gain == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(d.actions == std::vector<int>{1});
}

TEST_CASE("large deviation sets fall back to sampling") {
  std::mt19937_64 rng(8);
  const GameModel m = testing::random_model(rng, 6, 3, 3);
  const PolicyPair p = uniform_policies(m, TimeGrid(1.0, 4));
  DeviationOptions opt;
  opt.max_enumerated = 100;
  opt.sampled = 10;
  opt.start_states = {0};
  const DeviationReport d = deviation_gain(m, p, 1, 200, 2, opt);
  CHECK(d.sampled);
  CHECK(d.deviations_tried == 10);
}
