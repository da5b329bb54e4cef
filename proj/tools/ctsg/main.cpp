// Command-line front end: solve, simulate, check, ladder, build-example,
// matrix-game. Exit 0 on success, 1 on a validation or invariant failure,
// 2 on I/O, schema or usage errors.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ctsg/errors.hpp"
#include "ctsg/example_models.hpp"
#include "ctsg/game_model.hpp"
#include "ctsg/io.hpp"
#include "ctsg/matrix_game.hpp"
#include "ctsg/simulator.hpp"
#include "ctsg/solver.hpp"
#include "ctsg/truncation.hpp"

namespace {

using ctsg::io::json;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kIoError = 2;

void emit(const std::string& path, const json& j) {
  if (path.empty() || path == "-")
    std::cout << j.dump(2) << "\n";
  else
    ctsg::io::write_json(path, j);
}

// Certificate checks plus, when (i)-(iii) pass, the explicit value bounds.
json certificate_section(const ctsg::GameModel& model, ctsg::LyapunovCertificate& cert, double tol,
                         std::optional<ctsg::ValueBounds>& bounds) {
  cert = ctsg::check_assumptions(model, cert, tol);
  json j = ctsg::io::to_json(cert);
  if (cert.drift0_ok() && cert.rate_bound_ok() && cert.payoff_bound_ok()) {
    bounds = ctsg::compute_value_bounds(model, cert);
    j["value_bounds"] = ctsg::io::to_json(*bounds);
  }
  return j;
}

struct SolveArgs {
  std::string model, cert, out_value, out_policy, report;
  double eps = 1e-3;
  double tol = 1e-9;
  int nt = 256;
  int max_iter = 10000;
  int threads = 0;
  bool timing = false;
};

int run_solve(const SolveArgs& a) {
  const ctsg::GameModel model = ctsg::io::model_from_json(ctsg::io::read_json(a.model));
  const ctsg::ValidationReport validation = ctsg::validate_generator(model);
  if (!validation.ok()) {
    std::cout << ctsg::io::to_json(validation).dump(2) << "\n";
    return kFailed;
  }
  json report;
  std::optional<ctsg::ValueBounds> bounds;
  if (!a.cert.empty()) {
    auto cert = ctsg::io::certificate_from_json(ctsg::io::read_json(a.cert));
    report["certificate"] = certificate_section(model, cert, a.tol, bounds);
  }
  const ctsg::SolveResult s = ctsg::solve(model, ctsg::SolverConfig{a.eps, a.nt, a.max_iter, a.threads});
  report["solver"] = ctsg::io::to_json(s.report, a.timing);
  const auto row0 = s.value.values.row(0);
  report["value_t0"] = std::vector<double>(row0.begin(), row0.end());
  bool inside = true;
  if (bounds) {
    for (std::size_t x = 0; x < model.num_states(); ++x) inside = inside && bounds->contains(x, s.value(0, x));
    report["value_within_bounds"] = inside;
  }
  if (!a.out_value.empty()) ctsg::io::write_text(a.out_value, ctsg::io::value_grid_csv(s.value));
  if (!a.out_policy.empty()) ctsg::io::write_json(a.out_policy, ctsg::io::to_json(s.policies));
  if (!a.report.empty()) ctsg::io::write_json(a.report, report);

  std::cout << "iterations " << s.report.iterations << ", final delta " << s.report.final_delta
            << ", threshold " << s.report.threshold << (s.report.converged ? ", converged" : ", NOT converged")
            << "\n";
  for (std::size_t x = 0; x < model.num_states(); ++x)
    std::cout << "v(0," << x << ") = " << s.value(0, x) << "\n";
  return s.report.converged && inside ? kOk : kFailed;
}

struct SimulateArgs {
  std::string model, policy, out;
  std::size_t x0 = 0;
  double t0 = 0.0;
  std::size_t paths = 100000;
  std::uint64_t seed = 42;
  int threads = 0;
  int deviation = 0;
};

int run_simulate(const SimulateArgs& a) {
  const ctsg::GameModel model = ctsg::io::model_from_json(ctsg::io::read_json(a.model));
  const ctsg::ValidationReport validation = ctsg::validate_generator(model);
  if (!validation.ok()) {
    std::cout << ctsg::io::to_json(validation).dump(2) << "\n";
    return kFailed;
  }
  const ctsg::PolicyPair policies = ctsg::io::policies_from_json(ctsg::io::read_json(a.policy), model.horizon);
  json out;
  if (a.deviation == 0) {
    const auto est = ctsg::estimate_value(model, policies, a.x0, a.t0, a.paths, a.seed, {a.threads, false});
    out = ctsg::io::to_json(est);
    out["x0"] = a.x0;
    out["t0"] = a.t0;
    out["seed"] = a.seed;
  } else {
    ctsg::DeviationOptions opt;
    opt.threads = a.threads;
    out = ctsg::io::to_json(ctsg::deviation_gain(model, policies, a.deviation, a.paths, a.seed, opt));
    out["player"] = a.deviation;
    out["seed"] = a.seed;
  }
  emit(a.out, out);
  return kOk;
}

int run_check(const std::string& model_path, const std::string& cert_path, double tol, const std::string& out_path) {
  const ctsg::GameModel model = ctsg::io::model_from_json(ctsg::io::read_json(model_path));
  auto cert = ctsg::io::certificate_from_json(ctsg::io::read_json(cert_path));
  const ctsg::ValidationReport validation = ctsg::validate_generator(model);
  json out;
  out["generator"] = ctsg::io::to_json(validation);
  std::optional<ctsg::ValueBounds> bounds;
  out["certificate"] = certificate_section(model, cert, tol, bounds);
  out["ok"] = validation.ok() && cert.all_ok();
  emit(out_path, out);
  return validation.ok() && cert.all_ok() ? kOk : kFailed;
}

struct LadderArgs {
  std::string model, cert, levels = "4,8,16,32", kind = "nonnegative", out, report;
  double eps = 1e-3;
  double stop_tol = 0.0;
  int nt = 256;
  int max_iter = 10000;
  int threads = 0;
};

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      levels.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ctsg::SchemaError("--levels: '" + item + "' is not an integer");
    }
  }
  return levels;
}

int run_ladder(const LadderArgs& a) {
  const ctsg::GameModel model = ctsg::io::model_from_json(ctsg::io::read_json(a.model));
  const ctsg::ValidationReport validation = ctsg::validate_generator(model);
  if (!validation.ok()) {
    std::cout << ctsg::io::to_json(validation).dump(2) << "\n";
    return kFailed;
  }
  const auto cert = ctsg::io::certificate_from_json(ctsg::io::read_json(a.cert));
  const ctsg::LadderReport rep =
      ctsg::run_ladder(model, cert, parse_levels(a.levels), ctsg::SolverConfig{a.eps, a.nt, a.max_iter, a.threads},
                       ctsg::parse_ladder_kind(a.kind), a.stop_tol);
  if (!a.out.empty()) ctsg::io::write_text(a.out, ctsg::io::ladder_csv(rep));
  const json j = ctsg::io::to_json(rep);
  if (!a.report.empty())
    ctsg::io::write_json(a.report, j);
  else
    std::cout << j.dump(2) << "\n";
  return rep.monotone ? kOk : kFailed;
}

int run_build_example(const std::string& name, const std::string& params_path, const std::string& out,
                      const std::string& out_cert) {
  const json params = params_path.empty() ? json::object() : ctsg::io::read_json(params_path);
  ctsg::BuildResult built;
  if (name == "rps")
    built = ctsg::build_rps(ctsg::io::rps_params_from_json(params));
  else
    built = ctsg::build_gaussian(ctsg::io::gaussian_params_from_json(params));
  for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";
  emit(out, ctsg::io::to_json(built.model));
  if (!out_cert.empty()) ctsg::io::write_json(out_cert, ctsg::io::to_json(built.certificate));
  return kOk;
}

int run_matrix_game(const std::string& csv) {
  const ctsg::Matrix c = ctsg::io::matrix_from_csv(ctsg::io::read_text(csv));
  std::cout << ctsg::io::to_json(ctsg::solve_matrix_game(c)).dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver for finite-horizon zero-sum risk-sensitive continuous-time stochastic games"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Value iteration on the Shapley equation");
  solve->add_option("--model", solve_args.model, "Model JSON")->required();
  solve->add_option("--cert", solve_args.cert, "Lyapunov certificate JSON (checks and value bounds)");
  solve->add_option("--eps", solve_args.eps, "Accuracy target epsilon")->check(CLI::PositiveNumber);
  solve->add_option("--nt", solve_args.nt, "Time steps")->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", solve_args.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  solve->add_option("--tol", solve_args.tol, "Tolerance for the certificate checks");
  solve->add_option("--out-value", solve_args.out_value, "Value grid CSV (t,x_id,value)");
  solve->add_option("--out-policy", solve_args.out_policy, "Policy JSON");
  solve->add_option("--report", solve_args.report, "Report JSON");
  solve->add_option("--threads", solve_args.threads, "Worker threads (default: $CTSG_THREADS or all cores)");
  solve->add_flag("--timing", solve_args.timing, "Include wall time in the report");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the risk-sensitive value");
  simulate->add_option("--model", sim_args.model, "Model JSON")->required();
  simulate->add_option("--policy", sim_args.policy, "Policy JSON")->required();
  simulate->add_option("--x0", sim_args.x0, "Start state");
  simulate->add_option("--t0", sim_args.t0, "Start time (a grid node)");
  simulate->add_option("--paths", sim_args.paths, "Number of paths");
  simulate->add_option("--seed", sim_args.seed, "RNG seed");
  simulate->add_option("--out", sim_args.out, "Estimate JSON (default: stdout)");
  simulate->add_option("--threads", sim_args.threads, "Worker threads");
  simulate->add_option("--deviation", sim_args.deviation, "Estimate the best pure deviation gain of player 1 or 2")
      ->check(CLI::IsMember({1, 2}));

  std::string check_model, check_cert, check_out;
  double check_tol = 1e-9;
  auto* check = app.add_subcommand("check", "Validate the generator and check a Lyapunov certificate");
  check->add_option("--model", check_model, "Model JSON")->required();
  check->add_option("--cert", check_cert, "Certificate JSON")->required();
  check->add_option("--tol", check_tol, "Tolerance added to each inequality");
  check->add_option("--out", check_out, "Report JSON (default: stdout)");

  LadderArgs ladder_args;
  auto* ladder = app.add_subcommand("ladder", "Solve a truncation ladder");
  ladder->add_option("--model", ladder_args.model, "Model JSON")->required();
  ladder->add_option("--cert", ladder_args.cert, "Certificate JSON (V0 defines the sublevel sets)")->required();
  ladder->add_option("--levels", ladder_args.levels, "Comma-separated increasing levels");
  ladder->add_option("--kind", ladder_args.kind, "nonnegative or floor")
      ->check(CLI::IsMember({"nonnegative", "floor"}));
  ladder->add_option("--eps", ladder_args.eps, "Accuracy target per level")->check(CLI::PositiveNumber);
  ladder->add_option("--nt", ladder_args.nt, "Time steps")->check(CLI::PositiveNumber);
  ladder->add_option("--max-iter", ladder_args.max_iter, "Iteration cap per level")->check(CLI::PositiveNumber);
  ladder->add_option("--stop-tol", ladder_args.stop_tol, "Stop once a sup-difference falls below this")
      ->check(CLI::NonNegativeNumber);
  ladder->add_option("--out", ladder_args.out, "Ladder CSV (level,t,x_id,value)");
  ladder->add_option("--report", ladder_args.report, "Ladder JSON (default: stdout)");
  ladder->add_option("--threads", ladder_args.threads, "Worker threads");

  std::string ex_name, ex_params, ex_out, ex_cert;
  auto* build = app.add_subcommand("build-example", "Build a discretized example model and its certificate");
  build->add_option("--name", ex_name, "rps or gaussian")->required()->check(CLI::IsMember({"rps", "gaussian"}));
  build->add_option("--params", ex_params, "Parameter JSON");
  build->add_option("--out", ex_out, "Model JSON (default: stdout)");
  build->add_option("--out-cert", ex_cert, "Certificate JSON");

  std::string mg_csv;
  auto* mg = app.add_subcommand("matrix-game", "Solve one matrix game (row player maximizes)");
  mg->add_option("--csv", mg_csv, "Matrix CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kIoError;
  }

  try {
    if (*solve) return run_solve(solve_args);
    if (*simulate) return run_simulate(sim_args);
    if (*check) return run_check(check_model, check_cert, check_tol, check_out);
    if (*ladder) return run_ladder(ladder_args);
    if (*build) return run_build_example(ex_name, ex_params, ex_out, ex_cert);
    if (*mg) return run_matrix_game(mg_csv);
  } catch (const ctsg::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ctsg::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ctsg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kIoError;
}
