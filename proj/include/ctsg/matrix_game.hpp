#pragma once

#include <string>
#include <vector>

#include "ctsg/matrix.hpp"

namespace ctsg {

enum class LpStatus { kOptimal, kDegenerateOptimal };

std::string to_string(LpStatus status);

/// Value and optimal mixed strategies of a zero-sum matrix game in which the
/// row player maximizes phi^T C psi and the column player minimizes it.
struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> strategy_p1;
  std::vector<double> strategy_p2;
  LpStatus status = LpStatus::kOptimal;
};

/// Solves the game by one dense primal simplex (Bland's rule) on the shifted
/// normalized LP; the row strategy comes from the dual. Throws
/// PreconditionError on empty or non-finite input.
MatrixGameSolution solve_matrix_game(const Matrix& c);

/// phi^T C psi.
double bilinear(const Matrix& c, const std::vector<double>& phi, const std::vector<double>& psi);

/// Largest violation of the saddle inequalities: max(value - min_j (phi^T C)_j,
/// max_i (C psi)_i - value, 0).
double saddle_gap(const Matrix& c, const MatrixGameSolution& sol);

}  // namespace ctsg
