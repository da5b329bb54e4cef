#include "ctsg/truncation.hpp"

#include <algorithm>
#include <cmath>

#include "ctsg/errors.hpp"

namespace ctsg {

namespace {

double min_payoff(const GameModel& model) {
  double m = 0.0;
  for (const auto& r : model.payoff)
    if (!r.empty()) m = std::min(m, r.min());
  return m;
}

double min_terminal(const GameModel& model) {
  double m = 0.0;
  for (double g : model.terminal) m = std::min(m, g);
  return m;
}

}  // namespace

GameModel truncate_nonnegative(const GameModel& model, const LyapunovCertificate& cert, int n) {
  model.check_dimensions();
  if (cert.v0.size() != model.num_states())
    throw InvalidCertificate("certificate V0 length differs from state count");
  if (n <= 0) throw PreconditionError("truncation level must be positive");
  if (min_payoff(model) < 0.0 || min_terminal(model) < 0.0)
    throw PreconditionError(
        "truncate_nonnegative needs r >= 0 and g >= 0; use floor_and_shift for signed payoffs");
  const double cap = n;
  GameModel out = model;
  for (std::size_t x = 0; x < model.num_states(); ++x) {
    if (cert.v0[x] <= cap) {
      for (double& r : out.payoff[x].data()) r = std::min(cap, r);
      out.terminal[x] = std::min(cap, out.terminal[x]);
    } else {
      std::fill(out.payoff[x].data().begin(), out.payoff[x].data().end(), 0.0);
      std::fill(out.generator[x].data().begin(), out.generator[x].data().end(), 0.0);
      out.terminal[x] = 0.0;
    }
  }
  return out;
}

std::size_t sublevel_size(const LyapunovCertificate& cert, int n) {
  return static_cast<std::size_t>(
      std::count_if(cert.v0.begin(), cert.v0.end(), [&](double v) { return v <= n; }));
}

GameModel floor_payoffs(const GameModel& model, int n) {
  if (n <= 0) throw PreconditionError("floor level must be positive");
  GameModel out = model;
  const double floor = -static_cast<double>(n);
  for (auto& r : out.payoff)
    for (double& v : r.data()) v = std::max(floor, v);
  for (double& g : out.terminal) g = std::max(floor, g);
  return out;
}

double ShiftedModel::unshift_factor(double t) const {
  return std::exp(-theta * (horizon - t) * n - theta * n);
}

ValueGrid ShiftedModel::unshift(const ValueGrid& v) const {
  ValueGrid out = v;
  for (std::size_t i = 0; i < v.grid.num_nodes(); ++i) {
    const double f = unshift_factor(v.grid.node(i));
    for (double& e : out.values.row(i)) e *= f;
  }
  return out;
}

ShiftedModel floor_and_shift(const GameModel& model, int n) {
  ShiftedModel s{floor_payoffs(model, n), n, model.theta, model.horizon};
  for (auto& r : s.model.payoff)
    for (double& v : r.data()) v += n;
  for (double& g : s.model.terminal) g += n;
  return s;
}

std::string to_string(LadderKind kind) {
  return kind == LadderKind::kNonnegative ? "nonnegative" : "floor";
}

LadderKind parse_ladder_kind(const std::string& name) {
  if (name == "nonnegative") return LadderKind::kNonnegative;
  if (name == "floor") return LadderKind::kFloor;
  throw PreconditionError("unknown ladder kind '" + name + "' (expected nonnegative or floor)");
}

LadderReport run_ladder(const GameModel& model, const LyapunovCertificate& cert,
                        const std::vector<int>& levels, const SolverConfig& config, LadderKind kind,
                        double stop_tolerance) {
  if (levels.empty()) throw PreconditionError("ladder needs at least one level");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] <= 0) throw PreconditionError("ladder levels must be positive");
    if (k > 0 && levels[k] <= levels[k - 1]) throw PreconditionError("ladder levels must be strictly increasing");
  }

  LadderReport report;
  report.kind = kind;

  std::optional<ShiftedModel> pre;
  if (kind == LadderKind::kNonnegative) {
    const double worst = std::max(-min_payoff(model), -min_terminal(model));
    if (worst > 0.0) {
      const int n0 = static_cast<int>(std::ceil(worst));
      pre = floor_and_shift(model, n0);
      report.pre_shift = n0;
    }
  }

  const double direction = kind == LadderKind::kNonnegative ? 1.0 : -1.0;
  for (int n : levels) {
    LadderLevel level;
    level.n = n;
    try {
      if (kind == LadderKind::kNonnegative) {
        level.states_in_level = sublevel_size(cert, n);
        const GameModel bounded = truncate_nonnegative(pre ? pre->model : model, cert, n);
        SolveResult s = solve(bounded, config);
        level.converged = s.report.converged;
        level.iterations = s.report.iterations;
        level.threshold = s.report.threshold;
        level.value = pre ? pre->unshift(s.value) : std::move(s.value);
      } else {
        level.states_in_level = model.num_states();
        const ShiftedModel shifted = floor_and_shift(model, n);
        const SolveResult s = solve(shifted.model, config);
        level.converged = s.report.converged;
        level.iterations = s.report.iterations;
        level.threshold = s.report.threshold;
        level.value = shifted.unshift(s.value);
      }
    } catch (const Error& e) {
      level.error = e.what();
    }
    report.levels.push_back(std::move(level));
    if (report.levels.size() < 2) continue;

    const LadderLevel& lo = report.levels[report.levels.size() - 2];
    const LadderLevel& hi = report.levels.back();
    if (!lo.error.empty() || !hi.error.empty()) {
      report.sup_differences.push_back(NAN);
      report.monotone = false;
      continue;
    }
    const double diff = sup_distance(hi.value, lo.value);
    report.sup_differences.push_back(diff);
    const double slack = 10.0 * std::max(lo.threshold, hi.threshold);
    const auto a = lo.value.values.data();
    const auto b = hi.value.values.data();
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double against = direction * (a[c] - b[c]);
      if (against > report.worst_monotonicity_violation) report.worst_monotonicity_violation = against;
      if (against > slack) report.monotone = false;
    }
    if (stop_tolerance > 0.0 && diff < stop_tolerance) {
      report.stopped_early = report.levels.size() < levels.size();
      break;
    }
  }

  for (std::size_t k = 0; k < report.sup_differences.size(); ++k)
    if (!(report.sup_differences[k] >= 0.0) ||
        (k > 0 && !(report.sup_differences[k] < report.sup_differences[k - 1])))
      report.differences_decreasing = false;
  return report;
}

}  // namespace ctsg
