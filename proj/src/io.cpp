#include "ctsg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ctsg/errors.hpp"

namespace ctsg::io {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw SchemaError(std::string(what) + ": " + e.what());
  }
}

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw SchemaError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> number_array(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) throw SchemaError(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw SchemaError(std::string("field '") + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Matrix matrix_from(const json& rows, std::size_t expect_rows, std::size_t expect_cols, const std::string& what) {
  if (!rows.is_array() || rows.size() != expect_rows)
    throw SchemaError(what + ": expected " + std::to_string(expect_rows) + " rows");
  Matrix m(expect_rows, expect_cols);
  for (std::size_t i = 0; i < expect_rows; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || row.size() != expect_cols)
      throw SchemaError(what + ": row " + std::to_string(i) + " should have " + std::to_string(expect_cols) +
                        " entries");
    for (std::size_t j = 0; j < expect_cols; ++j) {
      if (!row[j].is_number()) throw SchemaError(what + ": entries must be numbers");
      m(i, j) = row[j].get<double>();
    }
  }
  return m;
}

Matrix free_matrix(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array())
    throw SchemaError(what + ": expected a nonempty array of rows");
  return matrix_from(rows, rows.size(), rows[0].size(), what);
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

json check_json(const CheckResult& c) {
  json j = {{"ok", c.ok}, {"worst_gap", c.worst_gap}, {"residual", c.residual}};
  if (c.witness_x >= 0) j["witness"] = {{"x", c.witness_x}, {"a", c.witness_a}, {"b", c.witness_b}};
  return j;
}

CheckResult check_from(const json& j) {
  CheckResult c;
  c.ok = field(j, "ok").get<bool>();
  c.worst_gap = number(j, "worst_gap");
  c.residual = number(j, "residual");
  if (j.contains("witness")) {
    const json& w = j.at("witness");
    c.witness_x = field(w, "x").get<int>();
    c.witness_a = field(w, "a").get<int>();
    c.witness_b = field(w, "b").get<int>();
  }
  return c;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw SchemaError(std::string(what) + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw SchemaError(std::string(what) + ": unknown field '" + k + "'");
}

PiecewiseLinear profile_from(const json& j) {
  PiecewiseLinear p;
  p.knots_x = number_array(j, "x");
  p.knots_y = number_array(j, "y");
  return p;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << text;
  if (!out) throw SchemaError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json to_json(const GameModel& m) {
  json states = json::array();
  for (const auto& s : m.states) {
    json e = {{"id", s.id}};
    if (s.coord) e["coord"] = *s.coord;
    states.push_back(e);
  }
  json payoff = json::array(), generator = json::array();
  for (std::size_t x = 0; x < m.num_states(); ++x) {
    payoff.push_back(matrix_json(m.payoff[x]));
    json gx = json::array();
    for (std::size_t a = 0; a < m.num_p1(x); ++a) {
      json ga = json::array();
      for (std::size_t b = 0; b < m.num_p2(x); ++b) {
        const auto row = m.rates(x, a, b);
        ga.push_back(std::vector<double>(row.begin(), row.end()));
      }
      gx.push_back(ga);
    }
    generator.push_back(gx);
  }
  return {{"states", states},       {"actions_p1", m.actions_p1}, {"actions_p2", m.actions_p2},
          {"payoff", payoff},       {"generator", generator},     {"terminal", m.terminal},
          {"theta", m.theta},       {"horizon", m.horizon}};
}

GameModel model_from_json(const json& j) {
  return guarded("model", [&] {
    reject_unknown_keys(j, {"states", "actions_p1", "actions_p2", "payoff", "generator", "terminal", "theta", "horizon"},
                        "model");
    GameModel m;
    const json& states = field(j, "states");
    if (!states.is_array() || states.empty()) throw SchemaError("model: 'states' must be a nonempty array");
    for (const auto& s : states) {
      State st;
      st.id = field(s, "id").get<int>();
      if (s.contains("coord")) st.coord = s.at("coord").get<double>();
      m.states.push_back(st);
    }
    const std::size_t n = m.states.size();
    for (std::size_t x = 0; x < n; ++x)
      if (m.states[x].id != static_cast<int>(x))
        throw SchemaError("model: state ids must be 0..N-1 in order");
    m.actions_p1 = field(j, "actions_p1").get<std::vector<std::vector<int>>>();
    m.actions_p2 = field(j, "actions_p2").get<std::vector<std::vector<int>>>();
    if (m.actions_p1.size() != n || m.actions_p2.size() != n)
      throw SchemaError("model: one action list per state is required for each player");
    const json& payoff = field(j, "payoff");
    const json& generator = field(j, "generator");
    if (!payoff.is_array() || payoff.size() != n) throw SchemaError("model: 'payoff' needs one matrix per state");
    if (!generator.is_array() || generator.size() != n)
      throw SchemaError("model: 'generator' needs one block per state");
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t na = m.actions_p1[x].size(), nb = m.actions_p2[x].size();
      const std::string where = "model: state " + std::to_string(x);
      m.payoff.push_back(matrix_from(payoff[x], na, nb, where + " payoff"));
      const json& gx = generator[x];
      if (!gx.is_array() || gx.size() != na) throw SchemaError(where + " generator: expected |A(x)| blocks");
      Matrix q(na * nb, n);
      for (std::size_t a = 0; a < na; ++a) {
        const Matrix block = matrix_from(gx[a], nb, n, where + " generator");
        for (std::size_t b = 0; b < nb; ++b)
          for (std::size_t y = 0; y < n; ++y) q(a * nb + b, y) = block(b, y);
      }
      m.generator.push_back(q);
    }
    m.terminal = number_array(j, "terminal");
    if (m.terminal.size() != n) throw SchemaError("model: 'terminal' length differs from state count");
    m.theta = number(j, "theta");
    m.horizon = number(j, "horizon");
    return m;
  });
}

json to_json(const LyapunovCertificate& c) {
  json j = {{"v0", c.v0}, {"v1", c.v1}, {"rho0", c.rho0}, {"l0", c.l0}, {"m0", c.m0},
            {"rho1", c.rho1}, {"b1", c.b1}, {"m1", c.m1}};
  if (c.checked) {
    json checks = {{"drift0", check_json(c.drift0)},
                   {"rate_bound", check_json(c.rate_bound)},
                   {"payoff_bound", check_json(c.payoff_bound)},
                   {"drift1", check_json(c.drift1)},
                   {"squeeze", check_json(c.squeeze)}};
    if (c.weak_payoff_bound) checks["weak_payoff_bound"] = check_json(*c.weak_payoff_bound);
    j["checks"] = checks;
    j["all_ok"] = c.all_ok();
  }
  return j;
}

LyapunovCertificate certificate_from_json(const json& j) {
  return guarded("certificate", [&] {
    reject_unknown_keys(j, {"v0", "v1", "rho0", "l0", "m0", "rho1", "b1", "m1", "checks", "all_ok"}, "certificate");
    LyapunovCertificate c;
    c.v0 = number_array(j, "v0");
    c.v1 = number_array(j, "v1");
    c.rho0 = number(j, "rho0");
    c.l0 = number(j, "l0");
    c.m0 = number(j, "m0");
    c.rho1 = number(j, "rho1");
    c.b1 = number(j, "b1");
    c.m1 = number(j, "m1");
    if (j.contains("checks")) {
      const json& k = j.at("checks");
      c.drift0 = check_from(field(k, "drift0"));
      c.rate_bound = check_from(field(k, "rate_bound"));
      c.payoff_bound = check_from(field(k, "payoff_bound"));
      c.drift1 = check_from(field(k, "drift1"));
      c.squeeze = check_from(field(k, "squeeze"));
      if (k.contains("weak_payoff_bound")) c.weak_payoff_bound = check_from(k.at("weak_payoff_bound"));
      c.checked = true;
    }
    return c;
  });
}

json to_json(const ValidationReport& r) {
  json v = json::array();
  for (const auto& e : r.violations)
    v.push_back({{"kind", to_string(e.kind)}, {"x", e.x}, {"a", e.a}, {"b", e.b}, {"y", e.y}, {"residual", e.residual}});
  return {{"ok", r.ok()}, {"violations", v}, {"q_star", r.q_star}, {"conservativity_tolerance", r.conservativity_tolerance}};
}

json to_json(const ValueBounds& b) {
  json j = {{"representable", b.representable},
            {"log_upper_const", b.log_upper_const},
            {"lower_exponent_const", b.lower_exponent_const},
            {"log_lower", b.log_lower},
            {"log_upper", b.log_upper},
            {"lower", b.lower}};
  if (b.representable) {
    j["upper_const"] = b.upper_const;
    j["upper"] = b.upper;
  } else {
    j["note"] = b.note;
  }
  return j;
}

json to_json(const MatrixGameSolution& s) {
  return {{"value", s.value}, {"strategy_p1", s.strategy_p1}, {"strategy_p2", s.strategy_p2}, {"status", to_string(s.status)}};
}

json to_json(const SolverReport& r, bool timing) {
  json j = {{"iterations", r.iterations},
            {"final_delta", r.final_delta},
            {"threshold", r.threshold},
            {"norm_r", r.norm_r},
            {"norm_q", r.norm_q},
            {"l_tilde", r.contraction.l_tilde},
            {"k", r.contraction.k},
            {"beta", r.contraction.beta},
            {"converged", r.converged},
            {"degenerate_payoff_norm", r.degenerate_payoff_norm},
            {"deltas", r.deltas}};
  if (timing) j["wall_time_seconds"] = r.wall_time_seconds;
  return j;
}

json to_json(const McEstimate& e) {
  return {{"mean", e.mean},
          {"standard_error", e.standard_error},
          {"paths", e.paths},
          {"confidence_level", e.confidence_level},
          {"ci_low", e.ci_low},
          {"ci_high", e.ci_high}};
}

json to_json(const DeviationReport& r) {
  return {{"gain", r.gain},     {"standard_error", r.standard_error}, {"x0", r.x0},
          {"actions", r.actions}, {"deviations_tried", r.deviations_tried}, {"sampled", r.sampled},
          {"base", to_json(r.base)}};
}

json to_json(const LadderReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels) {
    json e = {{"n", l.n}, {"states_in_level", l.states_in_level}, {"converged", l.converged},
              {"iterations", l.iterations}, {"threshold", l.threshold}};
    if (!l.error.empty()) {
      e["error"] = l.error;
    } else {
      const auto row = l.value.values.row(0);
      e["value_t0"] = std::vector<double>(row.begin(), row.end());
    }
    levels.push_back(e);
  }
  json diffs = json::array();
  for (double d : r.sup_differences) diffs.push_back(std::isfinite(d) ? json(d) : json(nullptr));
  json j = {{"kind", to_string(r.kind)},
            {"levels", levels},
            {"sup_differences", diffs},
            {"monotone", r.monotone},
            {"worst_monotonicity_violation", r.worst_monotonicity_violation},
            {"differences_decreasing", r.differences_decreasing},
            {"stopped_early", r.stopped_early}};
  if (r.pre_shift) j["pre_shift"] = *r.pre_shift;
  return j;
}

json to_json(const PolicyPair& p) {
  json out = json::array();
  for (std::size_t i = 0; i < p.grid.num_nodes(); ++i)
    for (std::size_t x = 0; x < p.num_states; ++x)
      out.push_back({{"t_index", i}, {"x_id", x}, {"pi1", p.p1(i, x)}, {"pi2", p.p2(i, x)}});
  return out;
}

PolicyPair policies_from_json(const json& j, double horizon) {
  return guarded("policy", [&] {
    if (!j.is_array() || j.empty()) throw SchemaError("policy: expected a nonempty array of records");
    std::size_t max_t = 0, max_x = 0;
    for (const auto& rec : j) {
      max_t = std::max(max_t, field(rec, "t_index").get<std::size_t>());
      max_x = std::max(max_x, field(rec, "x_id").get<std::size_t>());
    }
    if (max_t < 1) throw SchemaError("policy: needs at least two time nodes");
    PolicyPair p(TimeGrid(horizon, static_cast<int>(max_t)), max_x + 1);
    std::vector<bool> seen(p.pi1.size(), false);
    for (const auto& rec : j) {
      const std::size_t i = rec.at("t_index").get<std::size_t>();
      const std::size_t x = rec.at("x_id").get<std::size_t>();
      const std::size_t cell = i * p.num_states + x;
      if (seen[cell]) throw SchemaError("policy: duplicate record for t_index " + std::to_string(i) + ", x_id " + std::to_string(x));
      seen[cell] = true;
      p.pi1[cell] = field(rec, "pi1").get<std::vector<double>>();
      p.pi2[cell] = field(rec, "pi2").get<std::vector<double>>();
    }
    for (std::size_t c = 0; c < seen.size(); ++c)
      if (!seen[c]) throw SchemaError("policy: missing record for t_index " + std::to_string(c / p.num_states) +
                                      ", x_id " + std::to_string(c % p.num_states));
    return p;
  });
}

std::string value_grid_csv(const ValueGrid& v) {
  std::string out = "t,x_id,value\n";
  for (std::size_t i = 0; i < v.grid.num_nodes(); ++i) {
    const std::string t = fmt(v.grid.node(i));
    for (std::size_t x = 0; x < v.num_states(); ++x) out += t + "," + std::to_string(x) + "," + fmt(v(i, x)) + "\n";
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw SchemaError("not a number: '" + s + "'");
  }
  while (used < s.size() && (s[used] == ' ' || s[used] == '\t')) ++used;
  if (used != s.size()) throw SchemaError("not a number: '" + s + "'");
  return v;
}

}  // namespace

ValueGrid value_grid_from_csv(const std::string& text, double horizon) {
  auto rows = split_csv(text);
  if (rows.empty() || rows[0].size() != 3 || rows[0][0] != "t" || rows[0][1] != "x_id" || rows[0][2] != "value")
    throw SchemaError("value CSV: header must be t,x_id,value");
  std::map<double, std::map<std::size_t, double>> cells;
  std::size_t max_x = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3) throw SchemaError("value CSV: row " + std::to_string(r) + " needs 3 fields");
    const double t = parse_double(rows[r][0]);
    const double x = parse_double(rows[r][1]);
    if (x < 0 || x != std::floor(x)) throw SchemaError("value CSV: x_id must be a nonnegative integer");
    const auto xi = static_cast<std::size_t>(x);
    max_x = std::max(max_x, xi);
    cells[t][xi] = parse_double(rows[r][2]);
  }
  if (cells.size() < 2) throw SchemaError("value CSV: needs at least two time nodes");
  ValueGrid v(TimeGrid(horizon, static_cast<int>(cells.size() - 1)), max_x + 1);
  for (const auto& [t, by_x] : cells) {
    const int i = v.grid.node_index(t);
    if (i < 0) throw SchemaError("value CSV: time " + fmt(t) + " is not on a uniform grid over [0, horizon]");
    if (by_x.size() != max_x + 1) throw SchemaError("value CSV: time " + fmt(t) + " does not cover every state");
    for (const auto& [x, val] : by_x) v(static_cast<std::size_t>(i), x) = val;
  }
  return v;
}

std::string ladder_csv(const LadderReport& rep) {
  std::string out = "level,t,x_id,value\n";
  for (const auto& l : rep.levels) {
    if (!l.error.empty()) continue;
    for (std::size_t i = 0; i < l.value.grid.num_nodes(); ++i) {
      const std::string t = fmt(l.value.grid.node(i));
      for (std::size_t x = 0; x < l.value.num_states(); ++x)
        out += std::to_string(l.n) + "," + t + "," + std::to_string(x) + "," + fmt(l.value(i, x)) + "\n";
    }
  }
  return out;
}

Matrix matrix_from_csv(const std::string& text) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw SchemaError("matrix CSV is empty");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw SchemaError("matrix CSV: ragged row " + std::to_string(i));
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = parse_double(rows[i][j]);
  }
  return m;
}

RpsParams rps_params_from_json(const json& j) {
  return guarded("rps params", [&] {
    reject_unknown_keys(j, {"alpha", "rate_bound", "rate_table", "rate_profile", "x_max", "n_x", "theta", "horizon"},
                        "rps params");
    RpsParams p;
    if (j.contains("alpha")) p.alpha = number(j, "alpha");
    if (j.contains("rate_bound")) p.rate_bound = number(j, "rate_bound");
    if (j.contains("rate_table")) p.rate_table = free_matrix(j.at("rate_table"), "rate_table");
    if (j.contains("rate_profile")) p.rate_profile = profile_from(j.at("rate_profile"));
    if (j.contains("x_max")) p.x_max = number(j, "x_max");
    if (j.contains("n_x")) p.n_x = j.at("n_x").get<std::size_t>();
    if (j.contains("theta")) p.theta = number(j, "theta");
    if (j.contains("horizon")) p.horizon = number(j, "horizon");
    return p;
  });
}

GaussianParams gaussian_params_from_json(const json& j) {
  return guarded("gaussian params", [&] {
    reject_unknown_keys(j, {"rate_scale", "sigma", "rate_table", "rate_profile", "payoff_table", "m0", "terminal_scale",
                            "x_min", "x_max", "n_x", "theta", "horizon"},
                        "gaussian params");
    GaussianParams p;
    if (j.contains("rate_scale")) p.rate_scale = number(j, "rate_scale");
    if (j.contains("sigma")) p.sigma = number(j, "sigma");
    if (j.contains("rate_table")) p.rate_table = free_matrix(j.at("rate_table"), "rate_table");
    if (j.contains("rate_profile")) p.rate_profile = profile_from(j.at("rate_profile"));
    if (j.contains("payoff_table")) p.payoff_table = free_matrix(j.at("payoff_table"), "payoff_table");
    if (j.contains("m0")) p.m0 = number(j, "m0");
    if (j.contains("terminal_scale")) p.terminal_scale = number(j, "terminal_scale");
    if (j.contains("x_min")) p.x_min = number(j, "x_min");
    if (j.contains("x_max")) p.x_max = number(j, "x_max");
    if (j.contains("n_x")) p.n_x = j.at("n_x").get<std::size_t>();
    if (j.contains("theta")) p.theta = number(j, "theta");
    if (j.contains("horizon")) p.horizon = number(j, "horizon");
    return p;
  });
}

}  // namespace ctsg::io
