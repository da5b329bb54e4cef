#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "ctsg/example_models.hpp"
#include "ctsg/game_model.hpp"
#include "ctsg/matrix_game.hpp"
#include "ctsg/shapley.hpp"
#include "ctsg/simulator.hpp"
#include "ctsg/solver.hpp"
#include "ctsg/truncation.hpp"

namespace ctsg::io {

using json = nlohmann::json;

// All readers throw SchemaError on malformed input or unreadable files.

json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

json to_json(const GameModel& model);
GameModel model_from_json(const json& j);

/// Check results are included only once the certificate has been checked.
json to_json(const LyapunovCertificate& cert);
LyapunovCertificate certificate_from_json(const json& j);

json to_json(const ValidationReport& report);
json to_json(const ValueBounds& bounds);
json to_json(const MatrixGameSolution& sol);
/// wall_time_seconds is written only when `timing` is set, so reports are
/// byte-identical across runs by default.
json to_json(const SolverReport& report, bool timing = false);
json to_json(const McEstimate& est);
json to_json(const DeviationReport& rep);
json to_json(const LadderReport& rep);

/// Array of {t_index, x_id, pi1, pi2} records in (t_index, x_id) order.
json to_json(const PolicyPair& policies);
/// The number of steps is the largest t_index; the grid spans [0, horizon].
PolicyPair policies_from_json(const json& j, double horizon);

/// "t,x_id,value" rows, 17 significant digits.
std::string value_grid_csv(const ValueGrid& v);
ValueGrid value_grid_from_csv(const std::string& text, double horizon);

/// "level,t,x_id,value" rows for every level of a ladder.
std::string ladder_csv(const LadderReport& rep);

/// Comma-separated numeric matrix, one row per line.
Matrix matrix_from_csv(const std::string& text);
std::string read_text(const std::filesystem::path& path);

RpsParams rps_params_from_json(const json& j);
GaussianParams gaussian_params_from_json(const json& j);

}  // namespace ctsg::io
