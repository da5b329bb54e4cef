#include "ctsg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ctsg/errors.hpp"
#include "ctsg/parallel.hpp"

namespace ctsg {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform on [0, 1) with 53 random bits.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t draw_from_cdf(const std::vector<double>& cdf, std::mt19937_64& rng) {
  const double target = uniform01(rng) * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::size_t require_node(const TimeGrid& grid, double t0) {
  const int i = grid.node_index(t0);
  if (i < 0) throw PreconditionError("t0 = " + std::to_string(t0) + " is not a node of the policy grid");
  return static_cast<std::size_t>(i);
}

}  // namespace

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state ^= index * 0xD1B54A32D192ED03ULL;
  const std::uint64_t b = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

std::size_t Trajectory::state_at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return states.front();
  return states[static_cast<std::size_t>(it - times.begin()) - 1];
}

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

McEstimate summarize(std::vector<double> samples, bool keep) {
  const std::size_t n = samples.size();
  if (n < 2) throw PreconditionError("at least two paths are needed for a standard error");
  McEstimate e;
  e.paths = n;
  e.mean = pairwise_sum(samples.data(), n) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t k = 0; k < n; ++k) sq[k] = (samples[k] - e.mean) * (samples[k] - e.mean);
  const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
  e.standard_error = std::sqrt(var / static_cast<double>(n));
  const double z = 1.959963984540054;
  e.ci_low = e.mean - z * e.standard_error;
  e.ci_high = e.mean + z * e.standard_error;
  if (keep) e.samples = std::move(samples);
  return e;
}

PathSimulator::PathSimulator(const GameModel& model, const PolicyPair& policies)
    : model_(&model), grid_(policies.grid), n_(model.num_states()), lambda_(model.rate_norm()) {
  model.check_dimensions();
  policies.check_against(model);
  if (std::abs(policies.grid.horizon - model.horizon) > 1e-12 * model.horizon)
    throw DimensionError("policy grid horizon differs from the model horizon");
  if (!std::isfinite(lambda_)) throw PreconditionError("simulation needs finite rates");

  kernels_.resize(n_);
  for (std::size_t x = 0; x < n_; ++x) {
    const std::size_t pairs = model.num_p1(x) * model.num_p2(x);
    kernels_[x].resize(pairs);
    for (std::size_t k = 0; k < pairs; ++k) {
      const auto row = model.generator[x].row(k);
      Kernel& ker = kernels_[x][k];
      double acc = 0.0;
      for (std::size_t y = 0; y < n_; ++y) {
        if (y == x || row[y] <= 0.0) continue;
        acc += row[y];
        ker.dest.push_back(y);
        ker.cdf.push_back(acc);
      }
    }
  }

  cells_.resize(grid_.num_nodes() * n_);
  for (std::size_t i = 0; i < grid_.num_nodes(); ++i)
    for (std::size_t x = 0; x < n_; ++x) {
      Cell& c = cells_[i * n_ + x];
      const auto& p1 = policies.p1(i, x);
      const auto& p2 = policies.p2(i, x);
      const std::size_t nb = model.num_p2(x);
      c.pair_cdf.resize(model.num_p1(x) * nb);
      double acc = 0.0;
      for (std::size_t a = 0; a < model.num_p1(x); ++a)
        for (std::size_t b = 0; b < nb; ++b) {
          const double w = p1[a] * p2[b];
          c.rbar += w * model.reward(x, a, b);
          const double out = kernels_[x][a * nb + b].cdf.empty() ? 0.0 : kernels_[x][a * nb + b].cdf.back();
          acc += w * out;
          c.pair_cdf[a * nb + b] = acc;
        }
      c.qbar = acc;
    }
}

Trajectory PathSimulator::sample(std::size_t x0, double t0, std::mt19937_64& rng) const {
  if (x0 >= n_) throw DimensionError("start state out of range");
  std::size_t i = require_node(grid_, t0);
  const double horizon = grid_.horizon;
  const std::size_t last = static_cast<std::size_t>(grid_.n_steps);

  Trajectory path;
  double s = grid_.node(i);
  std::size_t x = x0;
  path.times.push_back(s);
  path.states.push_back(x);

  for (;;) {
    double next = std::numeric_limits<double>::infinity();
    if (lambda_ > 0.0) next = s - std::log1p(-uniform01(rng)) / lambda_;
    const double stop = std::min(next, horizon);

    // Accumulate the policy-averaged payoff over [s, stop] interval by interval.
    while (s < stop) {
      const double end = i < last ? std::min(stop, grid_.node(i + 1)) : stop;
      path.payoff_integral += cell(i, x).rbar * (end - s);
      s = end;
      if (i < last && s >= grid_.node(i + 1)) ++i;
    }
    if (next >= horizon) break;

    ++path.candidates;
    const Cell& c = cell(i, x);
    if (c.qbar <= 0.0 || uniform01(rng) * lambda_ >= c.qbar) continue;

    const std::size_t pair = draw_from_cdf(c.pair_cdf, rng);
    const Kernel& ker = kernels_[x][pair];
    const std::size_t y = ker.dest[draw_from_cdf(ker.cdf, rng)];
    const std::size_t nb = model_->num_p2(x);
    path.jump_actions.push_back(ActionPair{static_cast<int>(pair / nb), static_cast<int>(pair % nb)});
    x = y;
    path.times.push_back(s);
    path.states.push_back(x);
  }
  return path;
}

double PathSimulator::risk_functional(const Trajectory& path) const {
  return std::exp(model_->theta * (path.payoff_integral + model_->terminal[path.states.back()]));
}

Trajectory sample_path(const GameModel& model, const PolicyPair& policies, std::size_t x0,
                       std::uint64_t seed, double t0) {
  const PathSimulator sim(model, policies);
  auto rng = path_rng(seed, 0);
  return sim.sample(x0, t0, rng);
}

namespace {

std::vector<double> simulate_functionals(const PathSimulator& sim, std::size_t x0, double t0,
                                         std::size_t paths, std::uint64_t seed, int threads) {
  std::vector<double> out(paths);
  parallel_for(paths, resolve_threads(threads), [&](std::size_t k) {
    auto rng = path_rng(seed, k);
    out[k] = sim.risk_functional(sim.sample(x0, t0, rng));
  });
  return out;
}

}  // namespace

McEstimate estimate_value(const GameModel& model, const PolicyPair& policies, std::size_t x0,
                          double t0, std::size_t paths, std::uint64_t seed,
                          const SimulationOptions& options) {
  if (paths < 2) throw PreconditionError("estimate_value needs at least two paths");
  const PathSimulator sim(model, policies);
  require_node(sim.grid(), t0);
  return summarize(simulate_functionals(sim, x0, t0, paths, seed, options.threads),
                   options.keep_samples);
}

McEstimate estimate_state_moment(const GameModel& model, const PolicyPair& policies,
                                 const std::vector<double>& f, std::size_t x0, double t,
                                 std::size_t paths, std::uint64_t seed,
                                 const SimulationOptions& options) {
  if (paths < 2) throw PreconditionError("estimate_state_moment needs at least two paths");
  if (f.size() != model.num_states()) throw DimensionError("moment function length differs from state count");
  const PathSimulator sim(model, policies);
  std::vector<double> out(paths);
  parallel_for(paths, resolve_threads(options.threads), [&](std::size_t k) {
    auto rng = path_rng(seed, k);
    out[k] = f[sim.sample(x0, 0.0, rng).state_at(t)];
  });
  return summarize(std::move(out), options.keep_samples);
}

DeviationReport deviation_gain(const GameModel& model, const PolicyPair& base, int player,
                               std::size_t paths, std::uint64_t seed,
                               const DeviationOptions& options) {
  if (player != 1 && player != 2) throw PreconditionError("deviating player must be 1 or 2");
  if (paths < 2) throw PreconditionError("deviation_gain needs at least two paths");
  const std::size_t n = model.num_states();
  auto actions_at = [&](std::size_t x) { return player == 1 ? model.num_p1(x) : model.num_p2(x); };

  // Enumerate one action per state in mixed radix, or sample when too many.
  std::size_t total = 1;
  bool too_many = false;
  for (std::size_t x = 0; x < n; ++x) {
    if (total > options.max_enumerated / std::max<std::size_t>(1, actions_at(x))) too_many = true;
    total *= actions_at(x);
    if (too_many) break;
  }
  too_many = too_many || total > options.max_enumerated;

  std::vector<std::vector<int>> deviations;
  if (!too_many) {
    std::vector<int> digits(n, 0);
    for (std::size_t d = 0; d < total; ++d) {
      deviations.push_back(digits);
      for (std::size_t x = 0; x < n; ++x) {
        if (++digits[x] < static_cast<int>(actions_at(x))) break;
        digits[x] = 0;
      }
    }
  } else {
    auto rng = path_rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL, 0);
    for (std::size_t d = 0; d < options.sampled; ++d) {
      std::vector<int> dev(n);
      for (std::size_t x = 0; x < n; ++x)
        dev[x] = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, actions_at(x) - 1)(rng));
      deviations.push_back(std::move(dev));
    }
  }

  std::vector<std::size_t> starts = options.start_states;
  if (starts.empty())
    for (std::size_t x = 0; x < n; ++x) starts.push_back(x);

  const PathSimulator base_sim(model, base);
  DeviationReport report;
  report.sampled = too_many;
  report.deviations_tried = deviations.size();
  bool first = true;

  for (std::size_t x0 : starts) {
    const std::vector<double> base_values = simulate_functionals(base_sim, x0, 0.0, paths, seed, options.threads);
    for (const auto& dev : deviations) {
      PolicyPair policy = base;
      for (std::size_t i = 0; i < policy.grid.num_nodes(); ++i)
        for (std::size_t x = 0; x < n; ++x) {
          auto& p = player == 1 ? policy.p1(i, x) : policy.p2(i, x);
          std::fill(p.begin(), p.end(), 0.0);
          p[static_cast<std::size_t>(dev[x])] = 1.0;
        }
      const PathSimulator sim(model, policy);
      std::vector<double> diff = simulate_functionals(sim, x0, 0.0, paths, seed, options.threads);
      for (std::size_t k = 0; k < paths; ++k)
        diff[k] = player == 1 ? diff[k] - base_values[k] : base_values[k] - diff[k];
      const McEstimate d = summarize(std::move(diff));
      if (first || d.mean > report.gain) {
        first = false;
        report.gain = d.mean;
        report.standard_error = d.standard_error;
        report.x0 = x0;
        report.actions = dev;
        report.base = summarize(base_values);
      }
    }
  }
  return report;
}

}  // namespace ctsg
