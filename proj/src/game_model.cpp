#include "ctsg/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctsg/errors.hpp"

namespace ctsg {

void GameModel::check_dimensions() const {
  const std::size_t n = states.size();
  if (n == 0) throw DimensionError("model has no states");
  if (actions_p1.size() != n || actions_p2.size() != n)
    throw DimensionError("action set count differs from state count");
  if (payoff.size() != n) throw DimensionError("payoff tensor: expected one matrix per state");
  if (generator.size() != n) throw DimensionError("generator tensor: expected one block per state");
  if (terminal.size() != n) throw DimensionError("terminal reward length differs from state count");
  for (std::size_t x = 0; x < n; ++x) {
    if (states[x].id != static_cast<int>(x))
      throw DimensionError("state ids must be 0..N-1 in order; state " + std::to_string(x) +
                           " has id " + std::to_string(states[x].id));
    const std::size_t na = actions_p1[x].size();
    const std::size_t nb = actions_p2[x].size();
    if (payoff[x].rows() != na || payoff[x].cols() != nb)
      throw DimensionError("payoff at state " + std::to_string(x) + " is not |A(x)| x |B(x)|");
    if (generator[x].rows() != na * nb || generator[x].cols() != n)
      throw DimensionError("generator at state " + std::to_string(x) +
                           " is not (|A(x)||B(x)|) x N");
  }
}

std::vector<double> GameModel::stability_rates() const {
  std::vector<double> q_star(num_states(), 0.0);
  for (std::size_t x = 0; x < num_states(); ++x)
    for (std::size_t a = 0; a < num_p1(x); ++a)
      for (std::size_t b = 0; b < num_p2(x); ++b)
        q_star[x] = std::max(q_star[x], exit_rate(x, a, b));
  return q_star;
}

double GameModel::rate_norm() const {
  const auto q_star = stability_rates();
  return q_star.empty() ? 0.0 : *std::max_element(q_star.begin(), q_star.end());
}

double GameModel::payoff_norm() const {
  double m = 0.0;
  for (const auto& p : payoff) m = std::max(m, p.max_abs());
  return m;
}

double GameModel::max_abs_rate() const {
  double m = 0.0;
  for (const auto& g : generator) m = std::max(m, g.max_abs());
  return m;
}

GameModel make_uniform_action_model(std::size_t num_actions_p1, std::size_t num_actions_p2,
                                    std::vector<Matrix> payoff, std::vector<Matrix> generator,
                                    std::vector<double> terminal, double theta, double horizon,
                                    std::vector<double> coords) {
  GameModel m;
  const std::size_t n = terminal.size();
  if (!coords.empty() && coords.size() != n)
    throw DimensionError("coordinate count differs from state count");
  m.states.resize(n);
  std::vector<int> a1(num_actions_p1), a2(num_actions_p2);
  for (std::size_t i = 0; i < a1.size(); ++i) a1[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < a2.size(); ++i) a2[i] = static_cast<int>(i);
  for (std::size_t x = 0; x < n; ++x) {
    m.states[x].id = static_cast<int>(x);
    if (!coords.empty()) m.states[x].coord = coords[x];
  }
  m.actions_p1.assign(n, a1);
  m.actions_p2.assign(n, a2);
  m.payoff = std::move(payoff);
  m.generator = std::move(generator);
  m.terminal = std::move(terminal);
  m.theta = theta;
  m.horizon = horizon;
  m.check_dimensions();
  return m;
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kOffDiagonalNegative: return "off_diagonal_negative";
    case ViolationKind::kNotConservative: return "not_conservative";
    case ViolationKind::kUnstable: return "unstable";
    case ViolationKind::kNonFinite: return "non_finite";
    case ViolationKind::kEmptyActionSet: return "empty_action_set";
    case ViolationKind::kNonPositiveTheta: return "non_positive_theta";
    case ViolationKind::kNonPositiveHorizon: return "non_positive_horizon";
  }
  return "unknown";
}

ValidationReport validate_generator(const GameModel& model) {
  model.check_dimensions();
  ValidationReport report;
  auto add = [&](ViolationKind k, int x, int a, int b, int y, double res) {
    report.violations.push_back(Violation{k, x, a, b, y, res});
  };

  if (!(model.theta > 0.0) || !std::isfinite(model.theta))
    add(ViolationKind::kNonPositiveTheta, -1, -1, -1, -1, model.theta);
  if (!(model.horizon > 0.0) || !std::isfinite(model.horizon))
    add(ViolationKind::kNonPositiveHorizon, -1, -1, -1, -1, model.horizon);

  const double tol = kConservativityRelTol * model.max_abs_rate();
  report.conservativity_tolerance = tol;
  const std::size_t n = model.num_states();
  report.q_star.assign(n, 0.0);

  for (std::size_t x = 0; x < n; ++x) {
    const int xi = static_cast<int>(x);
    if (model.num_p1(x) == 0 || model.num_p2(x) == 0) add(ViolationKind::kEmptyActionSet, xi, -1, -1, -1, 0.0);
    for (std::size_t a = 0; a < model.num_p1(x); ++a) {
      for (std::size_t b = 0; b < model.num_p2(x); ++b) {
        const int ai = static_cast<int>(a), bi = static_cast<int>(b);
        if (!std::isfinite(model.reward(x, a, b))) add(ViolationKind::kNonFinite, xi, ai, bi, -1, model.reward(x, a, b));
        const auto row = model.rates(x, a, b);
        double sum = 0.0;
        bool finite = true;
        for (std::size_t y = 0; y < n; ++y) {
          const double q = row[y];
          if (!std::isfinite(q)) {
            add(ViolationKind::kNonFinite, xi, ai, bi, static_cast<int>(y), q);
            finite = false;
            continue;
          }
          if (y != x && q < 0.0) add(ViolationKind::kOffDiagonalNegative, xi, ai, bi, static_cast<int>(y), q);
          sum += q;
        }
        if (!finite) {
          add(ViolationKind::kUnstable, xi, ai, bi, xi, row[x]);
          continue;
        }
        if (std::abs(sum) > tol) add(ViolationKind::kNotConservative, xi, ai, bi, -1, sum);
        report.q_star[x] = std::max(report.q_star[x], -row[x]);
      }
    }
    if (!std::isfinite(model.terminal[x])) add(ViolationKind::kNonFinite, xi, -1, -1, -1, model.terminal[x]);
  }
  return report;
}

LyapunovCertificate constant_certificate(std::size_t num_states, double rho0, double l0, double m0,
                                         double rho1, double b1, double m1) {
  LyapunovCertificate c;
  c.v0.assign(num_states, 1.0);
  c.v1.assign(num_states, 1.0);
  c.rho0 = rho0;
  c.l0 = l0;
  c.m0 = m0;
  c.rho1 = rho1;
  c.b1 = b1;
  c.m1 = m1;
  return c;
}

namespace {

// Tracks the worst signed gap lhs - rhs over all visited cells.
class GapTracker {
 public:
  void observe(double gap, int x, int a = -1, int b = -1) {
    if (!seen_ || gap > result_.worst_gap) {
      result_.worst_gap = gap;
      result_.witness_x = x;
      result_.witness_a = a;
      result_.witness_b = b;
      seen_ = true;
    }
  }
  CheckResult finish(double tol) const {
    CheckResult r = result_;
    r.residual = std::max(r.worst_gap, 0.0);
    r.ok = r.worst_gap <= tol;
    return r;
  }

 private:
  CheckResult result_;
  bool seen_ = false;
};

void require_certificate_shape(const GameModel& model, const LyapunovCertificate& cert) {
  const std::size_t n = model.num_states();
  if (cert.v0.size() != n || cert.v1.size() != n)
    throw InvalidCertificate("certificate V0/V1 length differs from state count");
  for (std::size_t x = 0; x < n; ++x) {
    if (!(cert.v0[x] >= 1.0)) throw InvalidCertificate("V0(" + std::to_string(x) + ") < 1");
    if (!(cert.v1[x] >= 1.0)) throw InvalidCertificate("V1(" + std::to_string(x) + ") < 1");
  }
  for (double c : {cert.rho0, cert.l0, cert.m0, cert.rho1, cert.b1, cert.m1})
    if (!(c > 0.0) || !std::isfinite(c))
      throw InvalidCertificate("certificate constants must be finite and strictly positive");
}

}  // namespace

LyapunovCertificate check_assumptions(const GameModel& model, LyapunovCertificate cert,
                                      double tol) {
  model.check_dimensions();
  require_certificate_shape(model, cert);
  const std::size_t n = model.num_states();
  const double half_sqrt2 = std::sqrt(2.0) / 2.0;

  std::vector<double> v1_sq(n);
  for (std::size_t y = 0; y < n; ++y) v1_sq[y] = cert.v1[y] * cert.v1[y];

  GapTracker drift0, rate, pay, drift1, squeeze, weak;
  const auto q_star = model.stability_rates();
  bool terminal_zero = true;

  for (std::size_t x = 0; x < n; ++x) {
    const int xi = static_cast<int>(x);
    const double payoff_cap = cert.m0 + half_sqrt2 * std::sqrt(std::log(cert.v0[x]));
    const double weak_cap = cert.m0 + std::log(cert.v0[x]) / (2.0 * model.horizon * model.theta);
    for (std::size_t a = 0; a < model.num_p1(x); ++a) {
      for (std::size_t b = 0; b < model.num_p2(x); ++b) {
        const int ai = static_cast<int>(a), bi = static_cast<int>(b);
        const auto row = model.rates(x, a, b);
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
          s0 += cert.v0[y] * row[y];
          s1 += v1_sq[y] * row[y];
        }
        drift0.observe(s0 - cert.rho0 * cert.v0[x], xi, ai, bi);
        drift1.observe(s1 - (cert.rho1 * v1_sq[x] + cert.b1), xi, ai, bi);
        const double r = std::abs(model.reward(x, a, b));
        pay.observe(r - payoff_cap, xi, ai, bi);
        weak.observe(r - weak_cap, xi, ai, bi);
      }
    }
    pay.observe(std::abs(model.terminal[x]) - payoff_cap, xi);
    if (model.terminal[x] != 0.0) terminal_zero = false;
    rate.observe(q_star[x] - cert.l0 * cert.v0[x], xi);
    squeeze.observe(cert.v0[x] * cert.v0[x] - cert.m1 * cert.v1[x], xi);
  }

  cert.drift0 = drift0.finish(tol);
  cert.rate_bound = rate.finish(tol);
  cert.payoff_bound = pay.finish(tol);
  cert.drift1 = drift1.finish(tol);
  cert.squeeze = squeeze.finish(tol);
  if (terminal_zero)
    cert.weak_payoff_bound = weak.finish(tol);
  else
    cert.weak_payoff_bound.reset();
  cert.checked = true;
  return cert;
}

bool ValueBounds::contains(std::size_t x, double value) const {
  if (!(value > 0.0)) return false;
  const double lv = std::log(value);
  const double slack = 1e-12 * (1.0 + std::abs(lv));
  if (lv < log_lower[x] - slack) return false;
  if (representable && lv > log_upper[x] + slack) return false;
  return true;
}

ValueBounds compute_value_bounds(const GameModel& model, const LyapunovCertificate& cert) {
  if (!cert.drift0_ok() || !cert.rate_bound_ok() || !cert.payoff_bound_ok())
    throw PreconditionError(
        "compute_value_bounds: certificate checks (i)-(iii) must be run and pass first");
  const double T = model.horizon;
  const double th = model.theta;
  ValueBounds vb;
  vb.log_upper_const = 2.0 * T * th * (cert.m0 + T * th) + 2.0 * th * (cert.m0 + th) + cert.rho0 * T;
  const double e = std::exp(cert.rho0 * T);
  vb.lower_exponent_const = th * (T * e + cert.m0 * T + e + cert.m0);
  if (vb.log_upper_const > 700.0 || !std::isfinite(vb.lower_exponent_const)) {
    vb.representable = false;
    vb.note = "bound not representable";
    vb.upper_const = std::numeric_limits<double>::infinity();
  } else {
    vb.upper_const = std::exp(vb.log_upper_const);
  }
  const std::size_t n = model.num_states();
  vb.lower.resize(n);
  vb.upper.resize(n);
  vb.log_lower.resize(n);
  vb.log_upper.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    vb.log_lower[x] = -vb.lower_exponent_const * cert.v0[x];
    vb.log_upper[x] = vb.log_upper_const + std::log(cert.v0[x]);
    vb.lower[x] = std::exp(vb.log_lower[x]);
    vb.upper[x] = vb.representable ? vb.upper_const * cert.v0[x]
                                   : std::numeric_limits<double>::infinity();
  }
  return vb;
}

}  // namespace ctsg
